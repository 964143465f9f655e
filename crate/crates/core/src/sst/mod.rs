//! Streaming string transducers with unary output (weighted automata over
//! (ℕ, +, ×)), SSTs with lookaround, and the compiler from nested bimachines.

mod compile;
mod matrix;

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_traits::Zero;

pub use compile::{bimachine_to_lookaround, compile_pebble, compile_step, eliminate_lookaround};
pub use matrix::{dot, Matrix};

use crate::error::{Error, Result};
use crate::monoid::{Alphabet, Element, Morphism, Symbol};

/// f(w) = I · T(w) · F, with one update matrix per symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sst {
    alphabet: Alphabet,
    registers: Vec<String>,
    initial: Vec<BigUint>,
    updates: Vec<Matrix>,
    output: Vec<BigUint>,
}

fn check_vector(name: &str, v: &[BigUint], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::MalformedSst(format!("{name} has {} entries, expected {dim}", v.len())));
    }
    Ok(())
}

impl Sst {
    pub fn new(
        alphabet: Alphabet,
        registers: Vec<String>,
        initial: Vec<BigUint>,
        updates: Vec<Matrix>,
        output: Vec<BigUint>,
    ) -> Result<Self> {
        let dim = registers.len();
        check_vector("initial vector", &initial, dim)?;
        check_vector("final vector", &output, dim)?;
        if updates.len() != alphabet.len() {
            return Err(Error::MalformedSst(format!(
                "{} update matrices for {} symbols",
                updates.len(),
                alphabet.len()
            )));
        }
        if let Some(m) = updates.iter().find(|m| m.dim() != dim) {
            return Err(Error::MalformedSst(format!("update of dimension {} for {dim} registers", m.dim())));
        }
        Ok(Sst { alphabet, registers, initial, updates, output })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn dim(&self) -> usize {
        self.registers.len()
    }

    pub fn initial(&self) -> &[BigUint] {
        &self.initial
    }

    pub fn output(&self) -> &[BigUint] {
        &self.output
    }

    pub fn update(&self, a: Symbol) -> &Matrix {
        &self.updates[a]
    }

    pub fn updates(&self) -> &[Matrix] {
        &self.updates
    }

    /// T(w) as a matrix.
    pub fn transfer(&self, w: &[Symbol]) -> Matrix {
        w.iter().fold(Matrix::identity(self.dim()), |acc, &a| acc.mul(&self.updates[a]))
    }

    /// I · T(w).
    pub fn registers_after(&self, w: &[Symbol]) -> Vec<BigUint> {
        w.iter().fold(self.initial.clone(), |v, &a| self.updates[a].apply(&v))
    }

    /// I · T(w) · F; panics on symbols outside the alphabet.
    pub fn eval(&self, w: &[Symbol]) -> BigUint {
        dot(&self.registers_after(w), &self.output)
    }

    pub fn eval_word(&self, w: &[Symbol]) -> Result<BigUint> {
        self.alphabet.check_word(w)?;
        Ok(self.eval(w))
    }

    pub fn eval_str(&self, w: &str) -> Result<BigUint> {
        Ok(self.eval(&self.alphabet.parse_word(w)?))
    }

    /// Removes registers that are unreachable from I or cannot reach F,
    /// looking only at which entries are nonzero.
    pub fn trim(&self) -> Sst {
        let n = self.dim();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for t in &self.updates {
            for (y, s) in succ.iter_mut().enumerate() {
                for (x, _) in t.row(y) {
                    s.push(*x);
                    pred[*x].push(y);
                }
            }
        }
        let forward = closure(&self.initial, &succ);
        let backward = closure(&self.output, &pred);
        let keep: Vec<usize> = (0..n).filter(|&x| forward[x] && backward[x]).collect();
        self.restrict_registers(&keep)
    }

    fn restrict_registers(&self, keep: &[usize]) -> Sst {
        Sst {
            alphabet: self.alphabet.clone(),
            registers: keep.iter().map(|&x| self.registers[x].clone()).collect(),
            initial: keep.iter().map(|&x| self.initial[x].clone()).collect(),
            updates: self.updates.iter().map(|t| t.restrict(keep)).collect(),
            output: keep.iter().map(|&x| self.output[x].clone()).collect(),
        }
    }

    /// The SST read over a sub-alphabet of its base letters.
    pub fn restrict_alphabet(&self, alphabet: &Alphabet) -> Result<Sst> {
        if alphabet.marks() != self.alphabet.marks() {
            return Err(Error::AlphabetMismatch(format!("{} vs {}", alphabet, self.alphabet)));
        }
        let mut updates = Vec::with_capacity(alphabet.len());
        for s in alphabet.symbols() {
            let old = self.alphabet.parse_symbol(&alphabet.render(s))?;
            updates.push(self.updates[old].clone());
        }
        Ok(Sst { alphabet: alphabet.clone(), updates, ..self.clone() })
    }

    /// The same function over the marked alphabet, ignoring marks.
    pub fn lift_ignoring_mark(&self) -> Result<Sst> {
        let marked = self.alphabet.marked()?;
        let n = self.alphabet.len();
        let updates = marked.symbols().map(|s| self.updates[s % n].clone()).collect();
        Ok(Sst { alphabet: marked, updates, ..self.clone() })
    }

    /// Over the marked alphabet, computes the function on the prefix ending
    /// at the (unique) marked letter. A copy of the registers freezes the
    /// values reached there.
    pub fn lift_prefix_until_mark(&self) -> Result<Sst> {
        let marked = self.alphabet.marked()?;
        let n = self.alphabet.len();
        let d = self.dim();
        let mut registers = self.registers.clone();
        registers.extend(self.registers.iter().map(|r| format!("{r}'")));
        let mut initial = self.initial.clone();
        initial.resize(2 * d, BigUint::zero());
        let mut output = vec![BigUint::zero(); d];
        output.extend(self.output.iter().cloned());
        let updates = marked
            .symbols()
            .map(|s| {
                let t = &self.updates[s % n];
                let shift = if s >= n { d } else { 0 };
                let mut m = Matrix::zero(2 * d);
                for y in 0..d {
                    for (x, v) in t.row(y) {
                        m.add(y, x + shift, v);
                    }
                    m.add(d + y, d + y, &BigUint::from(1u32));
                }
                m
            })
            .collect();
        Sst::new(marked, registers, initial, updates, output)
    }
}

fn closure(start: &[BigUint], edges: &[Vec<usize>]) -> Vec<bool> {
    let mut seen: Vec<bool> = start.iter().map(|v| !v.is_zero()).collect();
    let mut queue: VecDeque<usize> = (0..seen.len()).filter(|&x| seen[x]).collect();
    while let Some(y) = queue.pop_front() {
        for &x in &edges[y] {
            if !seen[x] {
                seen[x] = true;
                queue.push_back(x);
            }
        }
    }
    seen
}

/// An SST whose update at a position depends on the images of the prefix
/// before it and the suffix after it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LookaroundSst {
    morphism: Morphism,
    registers: Vec<String>,
    initial: Vec<BigUint>,
    /// Indexed by `(m * |A| + a) * |M| + n`.
    updates: Vec<Matrix>,
    output: Vec<BigUint>,
}

impl LookaroundSst {
    pub fn new(
        morphism: Morphism,
        registers: Vec<String>,
        initial: Vec<BigUint>,
        updates: Vec<Matrix>,
        output: Vec<BigUint>,
    ) -> Result<Self> {
        let dim = registers.len();
        check_vector("initial vector", &initial, dim)?;
        check_vector("final vector", &output, dim)?;
        let m = morphism.monoid().size();
        let expected = m * morphism.alphabet().len() * m;
        if updates.len() != expected {
            return Err(Error::MalformedSst(format!("{} updates, expected {expected}", updates.len())));
        }
        if let Some(t) = updates.iter().find(|t| t.dim() != dim) {
            return Err(Error::MalformedSst(format!("update of dimension {} for {dim} registers", t.dim())));
        }
        Ok(LookaroundSst { morphism, registers, initial, updates, output })
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.morphism.alphabet()
    }

    pub fn morphism(&self) -> &Morphism {
        &self.morphism
    }

    pub fn registers(&self) -> &[String] {
        &self.registers
    }

    pub fn dim(&self) -> usize {
        self.registers.len()
    }

    pub fn initial(&self) -> &[BigUint] {
        &self.initial
    }

    pub fn output(&self) -> &[BigUint] {
        &self.output
    }

    pub fn update(&self, m: Element, a: Symbol, n: Element) -> &Matrix {
        let size = self.morphism.monoid().size();
        &self.updates[(m * self.alphabet().len() + a) * size + n]
    }

    /// Register vectors after each prefix: entry `i` is the vector after
    /// reading `w[..i]`, so the trace has `|w| + 1` entries.
    pub fn trace(&self, w: &[Symbol]) -> Vec<Vec<BigUint>> {
        let pre = self.morphism.prefixes(w);
        let suf = self.morphism.suffixes(w);
        let mut out = Vec::with_capacity(w.len() + 1);
        out.push(self.initial.clone());
        for i in 0..w.len() {
            let next = self.update(pre[i], w[i], suf[i + 1]).apply(&out[i]);
            out.push(next);
        }
        out
    }

    pub fn eval(&self, w: &[Symbol]) -> BigUint {
        dot(self.trace(w).last().unwrap(), &self.output)
    }

    pub fn eval_word(&self, w: &[Symbol]) -> Result<BigUint> {
        self.alphabet().check_word(w)?;
        Ok(self.eval(w))
    }

    pub fn eval_str(&self, w: &str) -> Result<BigUint> {
        Ok(self.eval(&self.alphabet().parse_word(w)?))
    }
}
