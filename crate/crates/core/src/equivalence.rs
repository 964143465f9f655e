//! Exact equivalence of SSTs, and of nested bimachines through compilation.
//!
//! The reachable space of register vectors `[I₁T₁(w), I₂T₂(w)]` is spanned
//! breadth-first over ℚ. The machines agree everywhere iff every spanning
//! vector gives equal outputs on both halves.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::machines::NestedBimachine;
use crate::monoid::Symbol;
use crate::sst::{compile_pebble, dot, Sst};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Inequivalent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub word: Vec<Symbol>,
    /// The word rendered over the shared alphabet.
    pub rendered: String,
    pub lhs: BigUint,
    pub rhs: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Dimension of the reachable vector space.
    pub basis_size: usize,
}

/// Rows in echelon form: row `i` has a 1 at `pivots[i]` and zeros at the
/// pivots of earlier rows.
struct Echelon {
    rows: Vec<Vec<BigRational>>,
    pivots: Vec<usize>,
}

impl Echelon {
    /// Adds `v` if it is independent of the rows; returns whether it was.
    fn insert(&mut self, v: &[BigUint]) -> bool {
        let mut c: Vec<BigRational> = v.iter().map(|x| BigRational::from_integer(BigInt::from(x.clone()))).collect();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if c[p].is_zero() {
                continue;
            }
            let k = c[p].clone();
            for (ci, ri) in c.iter_mut().zip(row) {
                if !ri.is_zero() {
                    *ci -= &k * ri;
                }
            }
        }
        let Some(p) = c.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = BigRational::one() / &c[p];
        for ci in c.iter_mut() {
            if !ci.is_zero() {
                *ci *= &inv;
            }
        }
        self.rows.push(c);
        self.pivots.push(p);
        true
    }
}

/// Decides whether two SSTs over the same alphabet compute the same function.
pub fn decide_equivalence(s1: &Sst, s2: &Sst) -> Result<EquivalenceReport> {
    if s1.alphabet() != s2.alphabet() {
        return Err(Error::AlphabetMismatch(format!("{} vs {}", s1.alphabet(), s2.alphabet())));
    }
    let alphabet = s1.alphabet();
    let d1 = s1.dim();
    let witness = |word: Vec<Symbol>, lhs: BigUint, rhs: BigUint| Witness {
        rendered: alphabet.render_word(&word),
        word,
        lhs,
        rhs,
    };

    let mut basis = Echelon { rows: Vec::new(), pivots: Vec::new() };
    let mut queue: VecDeque<(Vec<Symbol>, Vec<BigUint>, Vec<BigUint>)> = VecDeque::new();
    let (v1, v2) = (s1.initial().to_vec(), s2.initial().to_vec());
    let (o1, o2) = (dot(&v1, s1.output()), dot(&v2, s2.output()));
    if o1 != o2 {
        return Ok(EquivalenceReport {
            verdict: Verdict::Inequivalent,
            witness: Some(witness(Vec::new(), o1, o2)),
            basis_size: 0,
        });
    }
    if basis.insert(&[v1.as_slice(), v2.as_slice()].concat()) {
        queue.push_back((Vec::new(), v1, v2));
    }
    while let Some((word, v1, v2)) = queue.pop_front() {
        for a in alphabet.symbols() {
            let n1 = s1.update(a).apply(&v1);
            let n2 = s2.update(a).apply(&v2);
            let joined: Vec<BigUint> = n1.iter().chain(&n2).cloned().collect();
            debug_assert_eq!(joined.len(), d1 + s2.dim());
            if !basis.insert(&joined) {
                continue;
            }
            let mut next = word.clone();
            next.push(a);
            let (o1, o2) = (dot(&n1, s1.output()), dot(&n2, s2.output()));
            if o1 != o2 {
                return Ok(EquivalenceReport {
                    verdict: Verdict::Inequivalent,
                    witness: Some(witness(next, o1, o2)),
                    basis_size: basis.rows.len(),
                });
            }
            queue.push_back((next, n1, n2));
        }
    }
    Ok(EquivalenceReport { verdict: Verdict::Equivalent, witness: None, basis_size: basis.rows.len() })
}

/// Compiles both machines and decides equivalence of the (trimmed) SSTs.
pub fn decide_bimachine_equivalence(b1: &NestedBimachine, b2: &NestedBimachine) -> Result<EquivalenceReport> {
    if b1.alphabet() != b2.alphabet() {
        return Err(Error::AlphabetMismatch(format!("{} vs {}", b1.alphabet(), b2.alphabet())));
    }
    decide_equivalence(&compile_pebble(b1)?.trim(), &compile_pebble(b2)?.trim())
}

/// Whether the two SSTs differ on `w`.
pub fn verify_witness(s1: &Sst, s2: &Sst, w: &[Symbol]) -> Result<bool> {
    Ok(s1.eval_word(w)? != s2.eval_word(w)?)
}
