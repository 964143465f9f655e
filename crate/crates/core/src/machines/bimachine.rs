use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::monoid::{mark_position, Alphabet, Element, Morphism, ProductMorphism, Symbol};

/// What an external function receives when called at position `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    /// The whole word with position `i` marked.
    Pebble,
    /// The prefix ending at position `i`.
    Marble,
    /// The whole unmarked word.
    Blind,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Pebble => "pebble",
            Kind::Marble => "marble",
            Kind::Blind => "blind",
        }
    }

    pub fn from_name(s: &str) -> Result<Kind> {
        match s {
            "pebble" => Ok(Kind::Pebble),
            "marble" => Ok(Kind::Marble),
            "blind" => Ok(Kind::Blind),
            _ => Err(Error::MalformedMachine(format!("unknown kind {s:?}"))),
        }
    }
}

/// The output function λ, indexed by `(m * |B| + a) * |M| + n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lambda {
    /// Level 0: the number produced at a position.
    Values(Vec<BigUint>),
    /// Level ≥ 1: the external called at a position.
    Calls(Vec<usize>),
}

/// A bimachine whose outputs are either numbers (level 0) or calls to
/// external functions computed by bimachines one level down.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedBimachine {
    kind: Kind,
    level: usize,
    morphism: Morphism,
    lambda: Lambda,
    externals: Vec<NestedBimachine>,
}

impl NestedBimachine {
    pub fn new(kind: Kind, morphism: Morphism, lambda: Lambda, externals: Vec<NestedBimachine>) -> Result<Self> {
        let m = morphism.monoid().size();
        let expected = m * morphism.alphabet().len() * m;
        let len = match &lambda {
            Lambda::Values(v) => v.len(),
            Lambda::Calls(c) => c.len(),
        };
        if len != expected {
            return Err(Error::MalformedMachine(format!("λ has {len} entries, expected {expected}")));
        }
        let level = match &lambda {
            Lambda::Values(_) => {
                if !externals.is_empty() {
                    return Err(Error::MalformedMachine("level-0 machine with externals".into()));
                }
                0
            }
            Lambda::Calls(calls) => {
                let Some(first) = externals.first() else {
                    return Err(Error::MalformedMachine("calls without externals".into()));
                };
                if let Some(&c) = calls.iter().find(|&&c| c >= externals.len()) {
                    return Err(Error::MalformedMachine(format!("external index {c} out of range")));
                }
                let ext_alphabet = match kind {
                    Kind::Pebble => morphism.alphabet().marked()?,
                    Kind::Marble | Kind::Blind => morphism.alphabet().clone(),
                };
                for (j, e) in externals.iter().enumerate() {
                    if e.level != first.level {
                        return Err(Error::MalformedMachine(format!(
                            "external {j} has level {}, expected {}",
                            e.level, first.level
                        )));
                    }
                    if e.level > 0 && e.kind != kind {
                        return Err(Error::MalformedMachine(format!(
                            "external {j} is a {} machine inside a {} machine",
                            e.kind.name(),
                            kind.name()
                        )));
                    }
                    if *e.alphabet() != ext_alphabet {
                        return Err(Error::AlphabetMismatch(format!(
                            "external {j} reads {}, expected {}",
                            e.alphabet(),
                            ext_alphabet
                        )));
                    }
                }
                first.level + 1
            }
        };
        Ok(NestedBimachine { kind, level, morphism, lambda, externals })
    }

    /// Level-0 machine from a table of values.
    pub fn with_values(kind: Kind, morphism: Morphism, values: Vec<BigUint>) -> Result<Self> {
        Self::new(kind, morphism, Lambda::Values(values), Vec::new())
    }

    /// Level-0 machine with λ given by a closure on `(m, a, n)`.
    pub fn from_fn<F, V>(kind: Kind, morphism: Morphism, mut f: F) -> Result<Self>
    where
        F: FnMut(Element, Symbol, Element) -> V,
        V: Into<BigUint>,
    {
        let values = triples(&morphism).map(|(m, a, n)| f(m, a, n).into()).collect();
        Self::with_values(kind, morphism, values)
    }

    /// Machine with externals, λ given by a closure returning external indices.
    pub fn from_calls<F>(kind: Kind, morphism: Morphism, externals: Vec<NestedBimachine>, mut f: F) -> Result<Self>
    where
        F: FnMut(Element, Symbol, Element) -> usize,
    {
        let calls = triples(&morphism).map(|(m, a, n)| f(m, a, n)).collect();
        Self::new(kind, morphism, Lambda::Calls(calls), externals)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.morphism.alphabet()
    }

    pub fn morphism(&self) -> &Morphism {
        &self.morphism
    }

    pub fn lambda(&self) -> &Lambda {
        &self.lambda
    }

    pub fn externals(&self) -> &[NestedBimachine] {
        &self.externals
    }

    #[inline]
    pub fn index(&self, m: Element, a: Symbol, n: Element) -> usize {
        let size = self.morphism.monoid().size();
        (m * self.alphabet().len() + a) * size + n
    }

    /// λ(m, a, n) of a level-0 machine.
    pub fn value(&self, m: Element, a: Symbol, n: Element) -> &BigUint {
        match &self.lambda {
            Lambda::Values(v) => &v[self.index(m, a, n)],
            Lambda::Calls(_) => panic!("value() on a machine with externals"),
        }
    }

    /// External index λ(m, a, n) of a machine of level ≥ 1.
    pub fn call(&self, m: Element, a: Symbol, n: Element) -> usize {
        match &self.lambda {
            Lambda::Calls(c) => c[self.index(m, a, n)],
            Lambda::Values(_) => panic!("call() on a level-0 machine"),
        }
    }

    pub fn eval_word(&self, w: &[Symbol]) -> Result<BigUint> {
        self.alphabet().check_word(w)?;
        Ok(self.eval(w))
    }

    pub fn eval_str(&self, w: &str) -> Result<BigUint> {
        Ok(self.eval(&self.alphabet().parse_word(w)?))
    }

    /// The computed function; 0 on the empty word. Panics on symbols outside
    /// the alphabet (see [`eval_word`](Self::eval_word)).
    pub fn eval(&self, w: &[Symbol]) -> BigUint {
        let mut total = BigUint::zero();
        if w.is_empty() {
            return total;
        }
        let pre = self.morphism.prefixes(w);
        let suf = self.morphism.suffixes(w);
        for i in 0..w.len() {
            let idx = self.index(pre[i], w[i], suf[i + 1]);
            match &self.lambda {
                Lambda::Values(v) => total += &v[idx],
                Lambda::Calls(c) => {
                    let f = &self.externals[c[idx]];
                    total += match self.kind {
                        Kind::Pebble => f.eval(&mark_position(self.alphabet(), w, i)),
                        Kind::Marble => f.eval(&w[..=i]),
                        Kind::Blind => f.eval(w),
                    };
                }
            }
        }
        total
    }

    /// Reads the machine over `alphabet`, where `relabel` sends each new
    /// symbol to the old symbol it stands for. External alphabets follow the
    /// kind rule; for pebble machines the fresh mark is carried over.
    pub fn relabel(&self, alphabet: &Alphabet, relabel: &dyn Fn(Symbol) -> Symbol) -> Result<Self> {
        let old = self.alphabet();
        let image = alphabet.symbols().map(|s| self.morphism.letter(relabel(s))).collect();
        let morphism = Morphism::new(alphabet.clone(), self.morphism.monoid_arc().clone(), image)?;
        let size = morphism.monoid().size();
        let pick = |m: Element, a: Symbol, n: Element| (m * old.len() + relabel(a)) * size + n;
        let new_triples: Vec<(Element, Symbol, Element)> = triples(&morphism).collect();
        let lambda = match &self.lambda {
            Lambda::Values(v) => {
                Lambda::Values(new_triples.iter().map(|&(m, a, n)| v[pick(m, a, n)].clone()).collect())
            }
            Lambda::Calls(c) => Lambda::Calls(new_triples.iter().map(|&(m, a, n)| c[pick(m, a, n)]).collect()),
        };
        let externals = match self.kind {
            Kind::Pebble => {
                let marked = alphabet.marked()?;
                let width = alphabet.len();
                let inner = |s: Symbol| {
                    if s >= width {
                        old.mark(relabel(s - width))
                    } else {
                        relabel(s)
                    }
                };
                self.externals.iter().map(|e| e.relabel(&marked, &inner)).collect::<Result<_>>()?
            }
            Kind::Marble | Kind::Blind => {
                self.externals.iter().map(|e| e.relabel(alphabet, relabel)).collect::<Result<_>>()?
            }
        };
        NestedBimachine::new(self.kind, morphism, lambda, externals)
    }

    /// The same function read over the marked alphabet, ignoring marks.
    pub fn lift_to_marked(&self) -> Result<Self> {
        let n = self.alphabet().len();
        self.relabel(&self.alphabet().marked()?, &|s| s % n)
    }

    /// Product of the morphisms of every level (all over one alphabet), for
    /// marble and blind machines. Projection 0 is the top-level morphism;
    /// the others follow a preorder walk of the externals tree.
    pub fn shared_morphism(&self) -> Result<ProductMorphism> {
        let mut all = Vec::new();
        collect_morphisms(self, &mut all);
        Morphism::product_all(&all)
    }
}

fn collect_morphisms<'a>(b: &'a NestedBimachine, out: &mut Vec<&'a Morphism>) {
    out.push(&b.morphism);
    for e in &b.externals {
        collect_morphisms(e, out);
    }
}

/// All `(m, a, n)` in λ index order.
pub fn triples(morphism: &Morphism) -> impl Iterator<Item = (Element, Symbol, Element)> {
    let size = morphism.monoid().size();
    let nsym = morphism.alphabet().len();
    (0..size).flat_map(move |m| (0..nsym).flat_map(move |a| (0..size).map(move |n| (m, a, n))))
}

/// Σ coeffs[j] · machines[j], fused into one machine over the product of
/// the morphisms. Externals are combined recursively.
pub fn linear_combination(coeffs: &[BigUint], machines: &[&NestedBimachine]) -> Result<NestedBimachine> {
    if coeffs.len() != machines.len() || machines.is_empty() {
        return Err(Error::MalformedMachine(format!("{} coefficients for {} machines", coeffs.len(), machines.len())));
    }
    let first = machines[0];
    for b in machines {
        if b.level != first.level || b.alphabet() != first.alphabet() {
            return Err(Error::MalformedMachine(
                "linear combination of machines with different levels or alphabets".into(),
            ));
        }
        if b.level > 0 && b.kind != first.kind {
            return Err(Error::MalformedMachine("linear combination of different kinds".into()));
        }
    }
    let morphisms: Vec<&Morphism> = machines.iter().map(|b| &b.morphism).collect();
    let product = Morphism::product_all(&morphisms)?;
    let ProductMorphism { morphism, projections } = product;
    let component =
        |j: usize, m: Element, a: Symbol, n: Element| machines[j].index(projections[j][m], a, projections[j][n]);
    if first.level == 0 {
        let values = triples(&morphism)
            .map(|(m, a, n)| {
                let mut v = BigUint::zero();
                for (j, b) in machines.iter().enumerate() {
                    if let Lambda::Values(vals) = &b.lambda {
                        v += &coeffs[j] * &vals[component(j, m, a, n)];
                    }
                }
                v
            })
            .collect();
        return NestedBimachine::with_values(first.kind, morphism, values);
    }
    let mut combos: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut externals = Vec::new();
    let mut calls = Vec::new();
    for (m, a, n) in triples(&morphism) {
        let choice: Vec<usize> = machines
            .iter()
            .enumerate()
            .map(|(j, b)| match &b.lambda {
                Lambda::Calls(c) => c[component(j, m, a, n)],
                Lambda::Values(_) => unreachable!(),
            })
            .collect();
        let idx = match combos.get(&choice) {
            Some(&i) => i,
            None => {
                let parts: Vec<&NestedBimachine> =
                    choice.iter().enumerate().map(|(j, &e)| &machines[j].externals[e]).collect();
                externals.push(linear_combination(coeffs, &parts)?);
                combos.insert(choice, externals.len() - 1);
                externals.len() - 1
            }
        };
        calls.push(idx);
    }
    NestedBimachine::new(first.kind, morphism, Lambda::Calls(calls), externals)
}

/// A word with one marked position (1-based), rendered as ω(w, i).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkedWord {
    pub word: Vec<Symbol>,
    pub position: usize,
}

impl MarkedWord {
    pub fn new(word: Vec<Symbol>, position: usize) -> Result<Self> {
        if position == 0 || position > word.len() {
            return Err(Error::InvalidNode(format!("position {position} outside 1..={}", word.len())));
        }
        Ok(MarkedWord { word, position })
    }

    /// ω(w, i) over `alphabet.marked()`.
    pub fn symbols(&self, alphabet: &Alphabet) -> Vec<Symbol> {
        mark_position(alphabet, &self.word, self.position - 1)
    }

    pub fn render(&self, alphabet: &Alphabet) -> Result<String> {
        Ok(alphabet.marked()?.render_word(&self.symbols(alphabet)))
    }

    /// Recovers `(w, i)` from a word over `alphabet.marked()` carrying exactly
    /// one mark at the outer level.
    pub fn unmark(alphabet: &Alphabet, marked: &[Symbol]) -> Result<Self> {
        let m = alphabet.marked()?;
        let positions: Vec<usize> = (0..marked.len()).filter(|&i| m.is_marked(marked[i])).collect();
        if positions.len() != 1 {
            return Err(Error::InvalidNode(format!("{} marked letters", positions.len())));
        }
        let word = marked.iter().map(|&s| if m.is_marked(s) { m.unmark(s) } else { s }).collect();
        MarkedWord::new(word, positions[0] + 1)
    }
}
