//! Membership of one-marble functions in the blind class: productions,
//! bitypes and monotypes, the classification of pairs of forest nodes, the
//! decomposition of a function along a forest, and the symmetry search.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forest::{build_forest, Forest, NodeId, NodeType};
use crate::machines::{Kind, NestedBimachine};
use crate::monoid::{Alphabet, Element, FiniteMonoid, Morphism, Symbol};

/// A level-1 marble bimachine whose main machine and externals share one
/// surjective morphism.
#[derive(Clone, Debug)]
pub struct NormalizedMachine {
    original: NestedBimachine,
    morphism: Morphism,
    calls: Vec<usize>,
    externals: Vec<Vec<BigUint>>,
}

impl NormalizedMachine {
    pub fn new(b: &NestedBimachine) -> Result<Self> {
        if b.kind() != Kind::Marble || b.level() != 1 {
            return Err(Error::Unsupported(format!(
                "membership needs a level-1 marble machine, got a level-{} {} machine",
                b.level(),
                b.kind().name()
            )));
        }
        let shared = b.shared_morphism()?;
        let morphism = shared.morphism;
        let proj = &shared.projections;
        let size = morphism.monoid().size();
        let nsym = morphism.alphabet().len();
        let triples = || (0..size).flat_map(move |m| (0..nsym).flat_map(move |a| (0..size).map(move |n| (m, a, n))));
        let calls = triples().map(|(m, a, n)| b.call(proj[0][m], a, proj[0][n])).collect();
        let externals = b
            .externals()
            .iter()
            .enumerate()
            .map(|(k, f)| triples().map(|(m, a, n)| f.value(proj[k + 1][m], a, proj[k + 1][n]).clone()).collect())
            .collect();
        Ok(NormalizedMachine { original: b.clone(), morphism, calls, externals })
    }

    pub fn original(&self) -> &NestedBimachine {
        &self.original
    }

    pub fn morphism(&self) -> &Morphism {
        &self.morphism
    }

    pub fn monoid(&self) -> &FiniteMonoid {
        self.morphism.monoid()
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.morphism.alphabet()
    }

    /// Λ = 3|M|.
    pub fn lambda(&self) -> usize {
        3 * self.monoid().size()
    }

    /// 2^Λ, when it fits.
    pub fn word_bound(&self) -> Option<usize> {
        u32::try_from(self.lambda()).ok().and_then(|l| 1usize.checked_shl(l)).filter(|&b| b > 0)
    }

    fn index(&self, m: Element, a: Symbol, n: Element) -> usize {
        (m * self.alphabet().len() + a) * self.monoid().size() + n
    }

    /// The external called by the main machine.
    pub fn call(&self, m: Element, a: Symbol, n: Element) -> usize {
        self.calls[self.index(m, a, n)]
    }

    /// The output of external `f`.
    pub fn output(&self, f: usize, m: Element, a: Symbol, n: Element) -> &BigUint {
        &self.externals[f][self.index(m, a, n)]
    }

    /// The function, as the sum of all productions.
    pub fn eval(&self, w: &[Symbol]) -> BigUint {
        if w.is_empty() {
            return BigUint::zero();
        }
        let p = Productions::new(self, w);
        let mut total = BigUint::zero();
        for j in 1..=w.len() {
            for i in 1..=j {
                total += p.get(i, j);
            }
        }
        total
    }
}

/// Images of all factors of a word; `factor(i, j)` is μ(w[i:j]) (1-based,
/// empty when `j < i`).
struct Infixes {
    n: usize,
    one: Element,
    table: Vec<Element>,
}

impl Infixes {
    fn new(mu: &Morphism, w: &[Symbol]) -> Self {
        let n = w.len();
        let m = mu.monoid();
        let mut table = vec![m.identity(); (n + 1) * (n + 1)];
        for i in 1..=n {
            let mut v = m.identity();
            for j in i..=n {
                v = m.mul(v, mu.letter(w[j - 1]));
                table[i * (n + 1) + j] = v;
            }
        }
        Infixes { n, one: m.identity(), table }
    }

    fn factor(&self, i: usize, j: usize) -> Element {
        if j < i {
            self.one
        } else {
            self.table[i * (self.n + 1) + j]
        }
    }
}

/// Every production `prod(i, j)` of a word, `1 ≤ i ≤ j ≤ |w|`.
pub struct Productions {
    n: usize,
    table: Vec<BigUint>,
}

impl Productions {
    pub fn new(t: &NormalizedMachine, w: &[Symbol]) -> Self {
        let n = w.len();
        let inf = Infixes::new(&t.morphism, w);
        let mut table = vec![BigUint::zero(); (n + 1) * (n + 1)];
        for j in 1..=n {
            let f = t.call(inf.factor(1, j - 1), w[j - 1], inf.factor(j + 1, n));
            for i in 1..=j {
                table[i * (n + 1) + j] = t.output(f, inf.factor(1, i - 1), w[i - 1], inf.factor(i + 1, j)).clone();
            }
        }
        Productions { n, table }
    }

    /// The production performed in `i` when called from `j` (zero if `i > j`).
    pub fn get(&self, i: usize, j: usize) -> &BigUint {
        &self.table[i * (self.n + 1) + j]
    }

    /// Productions performed on the frontier of `i` when called from the
    /// frontier of `j`.
    pub fn nodes(&self, f: &Forest, i: NodeId, j: NodeId) -> BigUint {
        sum_frontiers(self, &f.frontier(i), &f.frontier(j))
    }
}

fn sum_frontiers(p: &Productions, fi: &[usize], fj: &[usize]) -> BigUint {
    let mut total = BigUint::zero();
    for &j in fj {
        for &i in fi.iter().take_while(|&&i| i <= j) {
            total += p.get(i, j);
        }
    }
    total
}

/// `prod(i, j)` on `w`, for `1 ≤ i ≤ j ≤ |w|`.
pub fn prod_positions(t: &NormalizedMachine, w: &[Symbol], i: usize, j: usize) -> Result<BigUint> {
    t.alphabet().check_word(w)?;
    if i == 0 || i > j || j > w.len() {
        return Err(Error::InvalidNode(format!("positions ({i}, {j}) out of order for a word of length {}", w.len())));
    }
    let inf = Infixes::new(&t.morphism, w);
    let f = t.call(inf.factor(1, j - 1), w[j - 1], inf.factor(j + 1, w.len()));
    Ok(t.output(f, inf.factor(1, i - 1), w[i - 1], inf.factor(i + 1, j)).clone())
}

/// `prod(I, J)` for two nodes of a forest of `w`.
pub fn prod_nodes(t: &NormalizedMachine, f: &Forest, i: NodeId, j: NodeId) -> Result<BigUint> {
    if i >= f.len() || j >= f.len() {
        return Err(Error::InvalidNode(format!("node {} or {} does not resolve", i, j)));
    }
    Ok(Productions::new(t, f.word()).nodes(f, i, j))
}

/// `m ⟨u1⟩ mid ⟨u2⟩ right`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bitype {
    pub left: Element,
    pub u1: Vec<Symbol>,
    pub mid: Element,
    pub u2: Vec<Symbol>,
    pub right: Element,
}

/// `m ⟨v⟩ right`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monotype {
    pub left: Element,
    pub v: Vec<Symbol>,
    pub right: Element,
}

/// The productions performed in `u1` by the calls from `u2`.
pub fn prod_bitype(t: &NormalizedMachine, b: &Bitype) -> BigUint {
    let m = t.monoid();
    let mu = &t.morphism;
    let (p1, s1) = (mu.prefixes(&b.u1), mu.suffixes(&b.u1));
    let (p2, s2) = (mu.prefixes(&b.u2), mu.suffixes(&b.u2));
    let before_u2 = m.mul(m.mul(b.left, p1[b.u1.len()]), b.mid);
    let mut total = BigUint::zero();
    for (j, &c) in b.u2.iter().enumerate() {
        let f = t.call(m.mul(before_u2, p2[j]), c, m.mul(s2[j + 1], b.right));
        // context after u1 up to and including the caller
        let tail = m.mul(b.mid, p2[j + 1]);
        for (i, &a) in b.u1.iter().enumerate() {
            total += t.output(f, m.mul(b.left, p1[i]), a, m.mul(s1[i + 1], tail));
        }
    }
    total
}

/// The productions performed in `v` by the calls from `v`. The right
/// context of a production stops at its caller.
pub fn prod_monotype(t: &NormalizedMachine, p: &Monotype) -> BigUint {
    let m = t.monoid();
    let inf = Infixes::new(&t.morphism, &p.v);
    let n = p.v.len();
    let mut total = BigUint::zero();
    for j in 1..=n {
        let f = t.call(m.mul(p.left, inf.factor(1, j - 1)), p.v[j - 1], m.mul(inf.factor(j + 1, n), p.right));
        for i in 1..=j {
            total += t.output(f, m.mul(p.left, inf.factor(1, i - 1)), p.v[i - 1], inf.factor(i + 1, j));
        }
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairClass {
    /// Iterable nodes under distinct bases.
    D,
    /// One node is an ancestor of the other, or a sibling of such an ancestor.
    L,
    /// The remaining pairs.
    I,
}

/// Per-forest data for classifying pairs of `parti(F)`.
struct Classifier<'a> {
    f: &'a Forest,
    basis: HashMap<NodeId, NodeId>,
    up: HashMap<NodeId, std::collections::BTreeSet<NodeId>>,
}

impl<'a> Classifier<'a> {
    fn new(f: &'a Forest) -> Self {
        let parti = f.parti();
        let basis = f.iterable_nodes().into_iter().map(|i| (i, f.basis(i).unwrap())).collect();
        let up = parti.iter().map(|&i| (i, f.up(i))).collect();
        Classifier { f, basis, up }
    }

    fn classify(&self, i: NodeId, j: NodeId) -> Result<PairClass> {
        let (Some(ui), Some(uj)) = (self.up.get(&i), self.up.get(&j)) else {
            return Err(Error::InvalidNode(format!(
                "({}, {}) is not a pair of iterable nodes or the root",
                self.f.path(i),
                self.f.path(j)
            )));
        };
        if let (Some(bi), Some(bj)) = (self.basis.get(&i), self.basis.get(&j)) {
            if bi != bj {
                return Ok(PairClass::D);
            }
        }
        if ui.contains(&j) || uj.contains(&i) {
            return Ok(PairClass::L);
        }
        Ok(PairClass::I)
    }
}

/// The class of a pair of nodes of `parti(F)`.
pub fn classify_pair(f: &Forest, i: NodeId, j: NodeId) -> Result<PairClass> {
    Classifier::new(f).classify(i, j)
}

/// The class-restricted sums of `prod(I, J)` over `parti(F)²`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub f_d: BigUint,
    pub f_l: BigUint,
    pub f_i: BigUint,
    /// The function itself, from the machine's own evaluator.
    pub total: BigUint,
}

/// Splits `f(w)` along the pair classes of `F`.
pub fn decompose_forest(t: &NormalizedMachine, f: &Forest) -> Decomposition {
    let p = Productions::new(t, f.word());
    let c = Classifier::new(f);
    let parti = f.parti();
    let frontiers: Vec<Vec<usize>> = parti.iter().map(|&i| f.frontier(i)).collect();
    let mut out = Decomposition {
        f_d: BigUint::zero(),
        f_l: BigUint::zero(),
        f_i: BigUint::zero(),
        total: t.original.eval(f.word()),
    };
    for (a, &i) in parti.iter().enumerate() {
        for (b, &j) in parti.iter().enumerate() {
            let v = sum_frontiers(&p, &frontiers[a], &frontiers[b]);
            match c.classify(i, j).expect("parti pairs classify") {
                PairClass::D => out.f_d += v,
                PairClass::L => out.f_l += v,
                PairClass::I => out.f_i += v,
            }
        }
    }
    out
}

/// [`decompose_forest`] on the forest built for `w` (nonempty).
pub fn decompose(t: &NormalizedMachine, w: &[Symbol]) -> Result<Decomposition> {
    t.alphabet().check_word(w)?;
    Ok(decompose_forest(t, &build_forest(&t.morphism, w)?))
}

/// `prod(I, J)` for a pair of class I.
pub fn typed_production(t: &NormalizedMachine, f: &Forest, i: NodeId, j: NodeId) -> Result<BigUint> {
    if classify_pair(f, i, j)? != PairClass::I {
        return Err(Error::InvalidNode(format!("({}, {}) is not an independent pair", f.path(i), f.path(j))));
    }
    prod_nodes(t, f, i, j)
}

/// A type without its depth.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeKey {
    pub m: Element,
    pub n: Element,
    pub e: Element,
    pub m_inner: Element,
    pub n_inner: Element,
    pub u: Vec<Symbol>,
}

impl From<&NodeType> for TypeKey {
    fn from(t: &NodeType) -> Self {
        TypeKey { m: t.m, n: t.n, e: t.e, m_inner: t.m_inner, n_inner: t.n_inner, u: t.u.clone() }
    }
}

/// Productions of all I-class pairs `I < J` of a forest, with their types.
pub fn independent_pairs(t: &NormalizedMachine, f: &Forest) -> Vec<(NodeType, NodeType, BigUint)> {
    let p = Productions::new(t, f.word());
    let c = Classifier::new(f);
    let iter = f.iterable_nodes();
    let mut out = Vec::new();
    for &i in &iter {
        for &j in &iter {
            if f.max(i) < f.min(j) && c.classify(i, j).unwrap() == PairClass::I {
                let (ti, tj) = (f.node_type(i).unwrap(), f.node_type(j).unwrap());
                out.push((ti, tj, p.nodes(f, i, j)));
            }
        }
    }
    out
}

/// Unordered pair of types, smaller first.
fn unordered<T: Ord>(a: T, b: T) -> (T, T) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Outcome of [`check_type_determinism`].
#[derive(Clone, Debug, Default)]
pub struct TypeDeterminism {
    /// Production of each unordered type pair, as first seen.
    pub table: BTreeMap<(NodeType, NodeType), BigUint>,
    pub pairs: usize,
    /// Pairs whose production differs from the first one of their type pair.
    pub violations: Vec<(NodeType, NodeType, BigUint, BigUint)>,
}

/// Checks that the I-class productions over a corpus of forests depend only
/// on the unordered pair of node types.
pub fn check_type_determinism<'a>(
    t: &NormalizedMachine,
    forests: impl IntoIterator<Item = &'a Forest>,
) -> TypeDeterminism {
    let mut out = TypeDeterminism::default();
    for f in forests {
        for (ti, tj, v) in independent_pairs(t, f) {
            out.pairs += 1;
            let key = unordered(ti, tj);
            match out.table.get(&key) {
                Some(k) if *k != v => out.violations.push((key.0, key.1, k.clone(), v)),
                Some(_) => {}
                None => {
                    out.table.insert(key, v);
                }
            }
        }
    }
    out
}

/// The monoid parameters `(m, n, m1, n1, m2, n2)` of a symmetry condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    pub m: Element,
    pub n: Element,
    pub m1: Element,
    pub n1: Element,
    pub m2: Element,
    pub n2: Element,
}

/// Which of the two bitype families an instantiation belongs to: family 1
/// reads `u1` before `u2`, family 2 reads `u2` before `u1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    First,
    Second,
}

/// One `p` satisfying a family's equations, with its bitype and production.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instantiation {
    pub family: Family,
    pub p: Element,
    pub bitype: Bitype,
    pub production: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryWitness {
    pub context: Context,
    pub u1: Vec<Symbol>,
    pub u2: Vec<Symbol>,
    pub first: Instantiation,
    pub second: Instantiation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryVerdict {
    SymmetricComplete,
    SymmetricUpToBound,
    NotSymmetric,
}

impl SymmetryVerdict {
    pub fn name(self) -> &'static str {
        match self {
            SymmetryVerdict::SymmetricComplete => "SymmetricComplete",
            SymmetryVerdict::SymmetricUpToBound => "SymmetricUpToBound",
            SymmetryVerdict::NotSymmetric => "NotSymmetric",
        }
    }
}

/// Bitype contexts `(left, mid, right)` of an instantiation.
type Key = (Family, Element, Element, Element);

/// Contexts sharing the same instantiation keys; all of them get the same K.
#[derive(Clone, Debug)]
struct Group {
    keys: Vec<Key>,
    /// `p` of the first context, aligned with `keys`.
    ps: Vec<Element>,
    contexts: Vec<Context>,
}

/// The common K of every admissible, non-vacuous `(context, u1, u2)`.
#[derive(Clone, Debug, Default)]
pub struct KTable {
    groups: BTreeMap<(Element, Element), Vec<Group>>,
    rows: Vec<(Vec<Symbol>, Vec<Symbol>, Vec<BigUint>)>,
    row_index: HashMap<(Vec<Symbol>, Vec<Symbol>), usize>,
    idempotent_of: HashMap<Vec<Symbol>, Element>,
}

impl KTable {
    fn groups_of(&self, u1: &[Symbol], u2: &[Symbol]) -> &[Group] {
        &self.groups[&(self.idempotent_of[u1], self.idempotent_of[u2])]
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|(u1, u2, _)| self.groups_of(u1, u2).iter().map(|g| g.contexts.len()).sum::<usize>()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Every entry `(context, u1, u2, K)`.
    pub fn iter(&self) -> impl Iterator<Item = (Context, &[Symbol], &[Symbol], &BigUint)> + '_ {
        self.rows.iter().flat_map(move |(u1, u2, ks)| {
            self.groups_of(u1, u2)
                .iter()
                .zip(ks)
                .flat_map(move |(g, k)| g.contexts.iter().map(move |&c| (c, u1.as_slice(), u2.as_slice(), k)))
        })
    }

    pub fn get(&self, context: &Context, u1: &[Symbol], u2: &[Symbol]) -> Option<&BigUint> {
        let row = *self.row_index.get(&(u1.to_vec(), u2.to_vec()))?;
        let (_, _, ks) = &self.rows[row];
        self.groups_of(u1, u2).iter().position(|g| g.contexts.contains(context)).map(|i| &ks[i])
    }

    /// The production of each unordered pair of (depth-free) types:
    /// `(m, n, e, m1, n1, u1)` and `(m, n, e, m2, n2, u2)` get the K of
    /// `(m, n, m1, n1, m2, n2, u1, u2)`.
    pub fn type_table(&self, monoid: &FiniteMonoid) -> BTreeMap<(TypeKey, TypeKey), BigUint> {
        let mut out = BTreeMap::new();
        for (c, u1, u2, k) in self.iter() {
            let e1 = self.idempotent_of[u1];
            let e = monoid.product([c.m1, e1, c.n1]);
            let t1 = TypeKey { m: c.m, n: c.n, e, m_inner: c.m1, n_inner: c.n1, u: u1.to_vec() };
            let t2 = TypeKey { m: c.m, n: c.n, e, m_inner: c.m2, n_inner: c.n2, u: u2.to_vec() };
            let prev = out.insert(unordered(t1, t2), k.clone());
            debug_assert!(prev.is_none_or(|p| p == *k));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub verdict: SymmetryVerdict,
    /// The word-length bound actually used.
    pub bound: usize,
    pub witness: Option<SymmetryWitness>,
    /// Filled in when no witness was found.
    pub k_table: KTable,
}

/// Options of [`check_symmetry`].
#[derive(Clone, Copy, Debug, Default)]
pub struct SymmetryOptions {
    /// Word-length bound L; [`default_bound`] when absent.
    pub bound: Option<usize>,
    /// Worker threads; rayon's default when absent.
    pub jobs: Option<usize>,
}

/// 6, or the full bound 2^Λ when that is at most 8.
pub fn default_bound(t: &NormalizedMachine) -> usize {
    match t.word_bound() {
        Some(b) if b <= 8 => b,
        _ => 6,
    }
}

/// Family-1 and family-2 instantiation keys, for every admissible context
/// with idempotents `e1`, `e2`, grouped by their key lists.
fn groups_for(m: &FiniteMonoid, e1: Element, e2: Element) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    let mut by_keys: HashMap<Vec<Key>, usize> = HashMap::new();
    let els: Vec<Element> = m.elements().collect();
    let mul = |xs: &[Element]| m.product(xs.iter().copied());
    for &mm in &els {
        for &nn in &els {
            for &m1 in &els {
                for &n1 in &els {
                    let e = mul(&[m1, e1, n1]);
                    if !m.is_idempotent(e) {
                        continue;
                    }
                    for &m2 in &els {
                        for &n2 in &els {
                            if mul(&[m2, e2, n2]) != e {
                                continue;
                            }
                            let c = Context { m: mm, n: nn, m1, n1, m2, n2 };
                            let mut keys: Vec<Key> = Vec::new();
                            let mut ps = Vec::new();
                            for (family, (a, ea, na), (b, eb, nb)) in [
                                (Family::First, (m1, e1, n1), (m2, e2, n2)),
                                (Family::Second, (m2, e2, n2), (m1, e1, n1)),
                            ] {
                                for p in m.elements() {
                                    let ok = mul(&[a, ea, p, eb, nb]) == e
                                        && mul(&[e, a, ea, p, eb]) == mul(&[e, b, eb])
                                        && mul(&[ea, p, eb, nb, e]) == mul(&[ea, na, e]);
                                    if !ok {
                                        continue;
                                    }
                                    let key = (family, mul(&[mm, e, a, ea]), mul(&[ea, p, eb]), mul(&[eb, nb, e, nn]));
                                    if !keys.contains(&key) {
                                        keys.push(key);
                                        ps.push(p);
                                    }
                                }
                            }
                            if keys.is_empty() {
                                continue;
                            }
                            match by_keys.get(&keys) {
                                Some(&g) => groups[g].contexts.push(c),
                                None => {
                                    by_keys.insert(keys.clone(), groups.len());
                                    groups.push(Group { keys, ps, contexts: vec![c] });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    groups
}

fn bitype_of(key: &Key, u1: &[Symbol], u2: &[Symbol]) -> Bitype {
    let (family, left, mid, right) = *key;
    let (a, b) = match family {
        Family::First => (u1, u2),
        Family::Second => (u2, u1),
    };
    Bitype { left, u1: a.to_vec(), mid, u2: b.to_vec(), right }
}

/// Result of one `(u1, u2)`: the K of each group, or the first failing group.
enum PairOutcome {
    Ks(Vec<BigUint>),
    Fails(usize),
}

/// Groups are listed in the order of their first context, so the first
/// failing group holds the least failing context.
fn check_pair(t: &NormalizedMachine, groups: &[Group], u1: &[Symbol], u2: &[Symbol]) -> PairOutcome {
    let mut memo: HashMap<Key, BigUint> = HashMap::new();
    let mut ks = Vec::with_capacity(groups.len());
    for (gi, g) in groups.iter().enumerate() {
        let mut prods = g
            .keys
            .iter()
            .map(|key| memo.entry(*key).or_insert_with(|| prod_bitype(t, &bitype_of(key, u1, u2))).clone());
        let k = prods.next().expect("groups are nonempty");
        if prods.any(|v| v != k) {
            return PairOutcome::Fails(gi);
        }
        ks.push(k);
    }
    PairOutcome::Ks(ks)
}

fn witness(t: &NormalizedMachine, g: &Group, u1: &[Symbol], u2: &[Symbol]) -> SymmetryWitness {
    let inst = |i: usize| {
        let bitype = bitype_of(&g.keys[i], u1, u2);
        Instantiation { family: g.keys[i].0, p: g.ps[i], production: prod_bitype(t, &bitype), bitype }
    };
    let first = inst(0);
    let second = (1..g.keys.len()).map(inst).find(|x| x.production != first.production).expect("failing group");
    SymmetryWitness { context: g.contexts[0], u1: u1.to_vec(), u2: u2.to_vec(), first, second }
}

/// Nonempty words of length at most `max` with idempotent image, shortlex.
fn idempotent_words(t: &NormalizedMachine, max: usize) -> Vec<(Vec<Symbol>, Element)> {
    let m = t.monoid();
    let mut out = Vec::new();
    let mut layer: Vec<(Vec<Symbol>, Element)> = vec![(Vec::new(), m.identity())];
    for _ in 0..max {
        layer = layer
            .iter()
            .flat_map(|(w, v)| {
                t.alphabet().symbols().map(move |a| {
                    let mut w = w.clone();
                    w.push(a);
                    (w, m.mul(*v, t.morphism.letter(a)))
                })
            })
            .collect();
        out.extend(layer.iter().filter(|(_, v)| m.is_idempotent(*v)).cloned());
    }
    out
}

/// Searches for a violation of symmetry over all words `u1`, `u2` of length
/// at most `min(L, 2^Λ)`, by increasing `|u1| + |u2|`, then `u1`, `u2` and
/// the context (all in lexicographic order). The first violation found in
/// that order is reported.
pub fn check_symmetry(t: &NormalizedMachine, options: SymmetryOptions) -> Result<SymmetryReport> {
    let requested = options.bound.unwrap_or_else(|| default_bound(t));
    let bound = match t.word_bound() {
        Some(full) => requested.min(full),
        None => requested,
    };
    let complete = t.word_bound().is_some_and(|full| bound >= full);
    let run = || search(t, bound, complete);
    match options.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Unsupported(e.to_string()))?
            .install(run),
        None => run(),
    }
}

fn search(t: &NormalizedMachine, bound: usize, complete: bool) -> Result<SymmetryReport> {
    let m = t.monoid();
    let words = idempotent_words(t, bound);
    let mut table = KTable::default();
    for (w, e) in &words {
        table.idempotent_of.insert(w.clone(), *e);
    }
    let idem: Vec<Element> = m.idempotents().into_iter().collect();
    for &e1 in &idem {
        for &e2 in &idem {
            table.groups.insert((e1, e2), groups_for(m, e1, e2));
        }
    }
    for total in 2..=2 * bound {
        let pairs: Vec<(&Vec<Symbol>, &Vec<Symbol>)> = words
            .iter()
            .filter(|(u1, _)| u1.len() < total && total - u1.len() <= bound)
            .flat_map(|(u1, _)| {
                words.iter().filter(move |(u2, _)| u1.len() + u2.len() == total).map(move |(u2, _)| (u1, u2))
            })
            .collect();
        let outcomes: Vec<PairOutcome> = pairs
            .par_iter()
            .map(|(u1, u2)| {
                let groups = &table.groups[&(table.idempotent_of[*u1], table.idempotent_of[*u2])];
                check_pair(t, groups, u1, u2)
            })
            .collect();
        for ((u1, u2), outcome) in pairs.into_iter().zip(outcomes) {
            match outcome {
                PairOutcome::Fails(gi) => {
                    let g = &table.groups[&(table.idempotent_of[u1], table.idempotent_of[u2])][gi];
                    return Ok(SymmetryReport {
                        verdict: SymmetryVerdict::NotSymmetric,
                        bound,
                        witness: Some(witness(t, g, u1, u2)),
                        k_table: KTable::default(),
                    });
                }
                PairOutcome::Ks(ks) => {
                    table.row_index.insert((u1.clone(), u2.clone()), table.rows.len());
                    table.rows.push((u1.clone(), u2.clone(), ks));
                }
            }
        }
    }
    let verdict = if complete { SymmetryVerdict::SymmetricComplete } else { SymmetryVerdict::SymmetricUpToBound };
    Ok(SymmetryReport { verdict, bound, witness: None, k_table: table })
}

/// Whether `p` satisfies the equations of `family` for `context`, `u1`, `u2`;
/// returns the bitype when it does.
pub fn instantiate(
    t: &NormalizedMachine,
    context: &Context,
    u1: &[Symbol],
    u2: &[Symbol],
    family: Family,
    p: Element,
) -> Option<Bitype> {
    let m = t.monoid();
    let mul = |xs: &[Element]| m.product(xs.iter().copied());
    let (e1, e2) = (t.morphism.eval(u1), t.morphism.eval(u2));
    let e = mul(&[context.m1, e1, context.n1]);
    let admissible = m.is_idempotent(e1)
        && m.is_idempotent(e2)
        && m.is_idempotent(e)
        && mul(&[context.m2, e2, context.n2]) == e
        && !u1.is_empty()
        && !u2.is_empty();
    if !admissible {
        return None;
    }
    let ((a, ea, na, ua), (b, eb, nb, ub)) = match family {
        Family::First => ((context.m1, e1, context.n1, u1), (context.m2, e2, context.n2, u2)),
        Family::Second => ((context.m2, e2, context.n2, u2), (context.m1, e1, context.n1, u1)),
    };
    let ok = mul(&[a, ea, p, eb, nb]) == e
        && mul(&[e, a, ea, p, eb]) == mul(&[e, b, eb])
        && mul(&[ea, p, eb, nb, e]) == mul(&[ea, na, e]);
    ok.then(|| Bitype {
        left: mul(&[context.m, e, a, ea]),
        u1: ua.to_vec(),
        mid: mul(&[ea, p, eb]),
        u2: ub.to_vec(),
        right: mul(&[eb, nb, e, context.n]),
    })
}

/// Replays a witness: both instantiations satisfy their equations, carry
/// the stated bitypes and productions, and the productions differ.
pub fn verify_symmetry_witness(t: &NormalizedMachine, w: &SymmetryWitness) -> bool {
    [&w.first, &w.second].iter().all(|x| {
        instantiate(t, &w.context, &w.u1, &w.u2, x.family, x.p).as_ref() == Some(&x.bitype)
            && prod_bitype(t, &x.bitype) == x.production
    }) && w.first.production != w.second.production
}

/// What the symmetry search says about computability by blind transducers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// Computable by a 1-blind transducer.
    Blind,
    /// Not computable by any k-blind transducer.
    NotBlind,
    /// Symmetric up to the bound only.
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct MembershipReport {
    pub membership: Membership,
    pub symmetry: SymmetryReport,
    /// Production of each unordered pair of types, when symmetric.
    pub type_table: BTreeMap<(TypeKey, TypeKey), BigUint>,
}

/// Normalizes a level-1 marble machine and runs the symmetry search.
pub fn membership_verdict(b: &NestedBimachine, options: SymmetryOptions) -> Result<MembershipReport> {
    let t = NormalizedMachine::new(b)?;
    let symmetry = check_symmetry(&t, options)?;
    let membership = match symmetry.verdict {
        SymmetryVerdict::SymmetricComplete => Membership::Blind,
        SymmetryVerdict::NotSymmetric => Membership::NotBlind,
        SymmetryVerdict::SymmetricUpToBound => Membership::Inconclusive,
    };
    let type_table = symmetry.k_table.type_table(t.monoid());
    Ok(MembershipReport { membership, symmetry, type_table })
}
