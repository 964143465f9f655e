//! Random machines and words, for differential testing.

use num_bigint::BigUint;
use rand::Rng;

use crate::error::Result;
use crate::forest::{Forest, Tree};
use crate::machines::{Kind, NestedBimachine};
use crate::monoid::{generate, Alphabet, Element, Morphism, Symbol};

/// A random word of length `0..=max_len`.
pub fn random_word<R: Rng>(rng: &mut R, alphabet: &Alphabet, max_len: usize) -> Vec<Symbol> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| rng.gen_range(0..alphabet.len())).collect()
}

/// The transition monoid of a random complete DFA with `states` states.
pub fn random_morphism<R: Rng>(rng: &mut R, alphabet: &Alphabet, states: usize) -> Morphism {
    let maps: Vec<Vec<usize>> =
        alphabet.symbols().map(|_| (0..states).map(|_| rng.gen_range(0..states)).collect()).collect();
    let identity: Vec<usize> = (0..states).collect();
    let g = generate(identity, &maps, |f, h| f.iter().map(|&x| h[x]).collect());
    Morphism::new(alphabet.clone(), g.monoid.into(), g.generators).expect("generated morphism is valid")
}

/// Shape of random machines.
#[derive(Clone, Debug)]
pub struct MachineShape {
    pub kind: Kind,
    pub level: usize,
    /// DFA states behind each morphism.
    pub states: usize,
    pub externals: usize,
    /// Level-0 outputs are drawn from `0..max_output`.
    pub max_output: u32,
}

impl Default for MachineShape {
    fn default() -> Self {
        MachineShape { kind: Kind::Marble, level: 1, states: 2, externals: 2, max_output: 3 }
    }
}

/// A random nested bimachine over `alphabet`.
pub fn random_machine<R: Rng>(rng: &mut R, alphabet: &Alphabet, shape: &MachineShape) -> Result<NestedBimachine> {
    let mu = random_morphism(rng, alphabet, shape.states);
    if shape.level == 0 {
        let max = shape.max_output.max(1);
        return NestedBimachine::from_fn(shape.kind, mu, |_, _, _| BigUint::from(rng.gen_range(0..max)));
    }
    let ext_alphabet = match shape.kind {
        Kind::Pebble => alphabet.marked()?,
        Kind::Marble | Kind::Blind => alphabet.clone(),
    };
    let inner = MachineShape { level: shape.level - 1, ..shape.clone() };
    let count = shape.externals.max(1);
    let externals = (0..count).map(|_| random_machine(rng, &ext_alphabet, &inner)).collect::<Result<Vec<_>>>()?;
    NestedBimachine::from_calls(shape.kind, mu, externals, |_, _, _| rng.gen_range(0..count))
}

/// A random factorization forest of `w` (nonempty). An inner node is
/// idempotent with probability 1/2 whenever its span allows it.
pub fn random_forest<R: Rng>(rng: &mut R, morphism: &Morphism, w: &[Symbol]) -> Result<Forest> {
    let tree = random_tree(rng, morphism, w);
    Forest::from_tree(morphism, w, &tree)
}

fn random_tree<R: Rng>(rng: &mut R, morphism: &Morphism, w: &[Symbol]) -> Tree {
    if w.len() == 1 {
        return Tree::Leaf(w[0]);
    }
    let e = morphism.eval(w);
    if morphism.monoid().is_idempotent(e) && rng.gen_bool(0.5) {
        if let Some(ends) = random_blocks(rng, morphism, w, e) {
            let mut start = 0;
            let mut kids = Vec::with_capacity(ends.len());
            for end in ends {
                kids.push(random_tree(rng, morphism, &w[start..end]));
                start = end;
            }
            return Tree::Node(kids);
        }
    }
    let j = rng.gen_range(1..w.len());
    Tree::Node(vec![random_tree(rng, morphism, &w[..j]), random_tree(rng, morphism, &w[j..])])
}

/// Random exclusive block ends of a split of `w` into at least three
/// blocks of image `e`.
fn random_blocks<R: Rng>(rng: &mut R, morphism: &Morphism, w: &[Symbol], e: Element) -> Option<Vec<usize>> {
    let n = w.len();
    let block = |j: usize, k: usize| morphism.eval(&w[j..k]) == e;
    // feasible[c][k]: w[..k] splits into c+1 blocks (c = 2 meaning three or more)
    let mut feasible = vec![vec![false; n + 1]; 3];
    for k in 1..=n {
        feasible[0][k] = block(0, k);
        for j in 1..k {
            if block(j, k) {
                feasible[1][k] |= feasible[0][j];
                feasible[2][k] |= feasible[1][j] || feasible[2][j];
            }
        }
    }
    if !feasible[2][n] {
        return None;
    }
    let feasible = &feasible;
    let mut ends = vec![n];
    let (mut c, mut k) = (2, n);
    while c > 0 {
        let prev: &[usize] = if c == 1 { &[0] } else { &[1, 2] };
        let options: Vec<(usize, usize)> = (1..k)
            .filter(|&j| block(j, k))
            .flat_map(|j| prev.iter().filter(move |&&pc| feasible[pc][j]).map(move |&pc| (j, pc)))
            .collect();
        let (j, pc) = options[rng.gen_range(0..options.len())];
        ends.push(j);
        c = pc;
        k = j;
    }
    ends.reverse();
    Some(ends)
}
