//! Finite monoids given by multiplication tables, and morphisms from free
//! monoids into them.

mod alphabet;
mod morphism;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::hash::Hash;

pub use alphabet::{mark_position, Alphabet, Symbol, MAX_MARKS};
pub use morphism::{Morphism, ProductMorphism};

use crate::error::{Error, Result};

/// Dense index of a monoid element.
pub type Element = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteMonoid {
    size: usize,
    identity: Element,
    table: Vec<Element>,
}

impl FiniteMonoid {
    /// Builds a monoid from its table, checking closure, identity and
    /// associativity.
    pub fn new(table: Vec<Vec<Element>>, identity: Element) -> Result<Self> {
        let size = table.len();
        if size == 0 {
            return Err(Error::MalformedMonoid("empty table".into()));
        }
        if identity >= size {
            return Err(Error::MalformedMonoid(format!("identity {identity} out of range")));
        }
        let mut flat = Vec::with_capacity(size * size);
        for (x, row) in table.iter().enumerate() {
            if row.len() != size {
                return Err(Error::MalformedMonoid(format!("row {x} has length {}", row.len())));
            }
            for &v in row {
                if v >= size {
                    return Err(Error::MalformedMonoid(format!("entry {v} in row {x} out of range")));
                }
            }
            flat.extend_from_slice(row);
        }
        let m = FiniteMonoid { size, identity, table: flat };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        for x in 0..self.size {
            if self.mul(self.identity, x) != x || self.mul(x, self.identity) != x {
                return Err(Error::MalformedMonoid(format!("identity law fails at {x}")));
            }
        }
        for x in 0..self.size {
            for y in 0..self.size {
                let xy = self.mul(x, y);
                for z in 0..self.size {
                    if self.mul(xy, z) != self.mul(x, self.mul(y, z)) {
                        return Err(Error::MalformedMonoid(format!("associativity fails at ({x}, {y}, {z})")));
                    }
                }
            }
        }
        Ok(())
    }

    /// The one-element monoid.
    pub fn trivial() -> Self {
        FiniteMonoid { size: 1, identity: 0, table: vec![0] }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn identity(&self) -> Element {
        self.identity
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.size
    }

    /// Table lookup. Panics when an index is out of range.
    #[inline]
    pub fn mul(&self, m: Element, n: Element) -> Element {
        self.table[m * self.size + n]
    }

    /// Checked multiplication.
    pub fn multiply(&self, m: Element, n: Element) -> Result<Element> {
        if m >= self.size || n >= self.size {
            return Err(Error::MalformedMonoid(format!("element out of range in {m}·{n}")));
        }
        Ok(self.mul(m, n))
    }

    /// Product of a sequence of elements; the identity for an empty one.
    pub fn product<I: IntoIterator<Item = Element>>(&self, it: I) -> Element {
        it.into_iter().fold(self.identity, |acc, x| self.mul(acc, x))
    }

    pub fn power(&self, m: Element, k: usize) -> Element {
        (0..k).fold(self.identity, |acc, _| self.mul(acc, m))
    }

    pub fn is_idempotent(&self, e: Element) -> bool {
        self.mul(e, e) == e
    }

    pub fn idempotents(&self) -> BTreeSet<Element> {
        self.elements().filter(|&e| self.is_idempotent(e)).collect()
    }

    /// Least ω ≥ 1 such that m^ω is idempotent for every m.
    pub fn idempotent_power(&self) -> usize {
        // m^k is idempotent iff k is at least the index of m and a multiple
        // of its period.
        let mut lcm = 1usize;
        let mut max_index = 1usize;
        for m in self.elements() {
            let mut seen: HashMap<Element, usize> = HashMap::new();
            let mut x = m;
            let mut k = 1;
            while let std::collections::hash_map::Entry::Vacant(v) = seen.entry(x) {
                v.insert(k);
                x = self.mul(x, m);
                k += 1;
            }
            let index = seen[&x];
            let period = k - index;
            lcm = lcm / gcd(lcm, period) * period;
            max_index = max_index.max(index);
        }
        max_index.div_ceil(lcm) * lcm
    }

    /// Direct product; the pair (x, y) is encoded as `x * other.size + y`.
    pub fn direct_product(&self, other: &FiniteMonoid) -> FiniteMonoid {
        let n = other.size;
        let size = self.size * n;
        let mut table = Vec::with_capacity(size * size);
        for a in 0..size {
            for b in 0..size {
                table.push(self.mul(a / n, b / n) * n + other.mul(a % n, b % n));
            }
        }
        FiniteMonoid { size, identity: self.identity * n + other.identity, table }
    }

    /// The submonoid generated by `generators`, reindexed densely in
    /// breadth-first order with the identity first. Returns the submonoid and
    /// the embedding of its elements into `self`.
    pub fn submonoid(&self, generators: &[Element]) -> (FiniteMonoid, Vec<Element>) {
        let gen = generate(self.identity, generators, |&a, &b| self.mul(a, b));
        (gen.monoid, gen.elements)
    }

    /// Rows of the multiplication table.
    pub fn rows(&self) -> Vec<Vec<Element>> {
        self.table.chunks(self.size).map(|r| r.to_vec()).collect()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Result of closing a set of generators under an associative product.
pub struct Generated<K> {
    /// Keys of the elements, indexed by element. Index 0 is the identity.
    pub elements: Vec<K>,
    pub monoid: FiniteMonoid,
    /// Element of each generator.
    pub generators: Vec<Element>,
}

/// Closes `generators` under `mul`, starting from `identity`. The product must
/// be associative with `identity` neutral; the table is built without
/// re-validation.
pub fn generate<K, F>(identity: K, generators: &[K], mul: F) -> Generated<K>
where
    K: Clone + Eq + Hash,
    F: Fn(&K, &K) -> K,
{
    let mut index: HashMap<K, Element> = HashMap::new();
    let mut elements = vec![identity.clone()];
    index.insert(identity, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in generators {
            let k = mul(&elements[i], g);
            if !index.contains_key(&k) {
                index.insert(k.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(k);
            }
        }
    }
    let size = elements.len();
    let mut table = Vec::with_capacity(size * size);
    for a in &elements {
        for b in &elements {
            table.push(index[&mul(a, b)]);
        }
    }
    let generators = generators.iter().map(|g| index[g]).collect();
    Generated { elements, monoid: FiniteMonoid { size, identity: 0, table }, generators }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example22() -> FiniteMonoid {
        // 1_M = 0, 2_M = 1, 3_M = 2; 2_M² = 1_M, 3_M absorbing.
        FiniteMonoid::new(vec![vec![0, 1, 2], vec![1, 0, 2], vec![2, 2, 2]], 0).unwrap()
    }

    #[test]
    fn example22_laws() {
        let m = example22();
        assert_eq!(m.multiply(1, 1).unwrap(), 0);
        assert_eq!(m.idempotents(), BTreeSet::from([0, 2]));
        assert_eq!(m.idempotent_power(), 2);
    }

    #[test]
    fn trivial_monoid() {
        let m = FiniteMonoid::trivial();
        assert_eq!(m.idempotents(), BTreeSet::from([0]));
        assert_eq!(m.idempotent_power(), 1);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(FiniteMonoid::new(vec![vec![0, 1], vec![1, 1]], 1).is_err());
        assert!(FiniteMonoid::new(vec![vec![0, 1], vec![1, 2]], 0).is_err());
        // (1·1)·2 = 2 but 1·(1·2) = 1
        let t = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 2, 2]];
        assert!(FiniteMonoid::new(t, 0).is_err());
        assert!(FiniteMonoid::trivial().multiply(0, 1).is_err());
    }

    #[test]
    fn idempotent_power_cyclic() {
        // Z/6 with an adjoined absorbing zero: ω = 6.
        let n = 7;
        let mut t = vec![vec![6; n]; n];
        for (a, row) in t.iter_mut().enumerate().take(6) {
            for (b, v) in row.iter_mut().enumerate().take(6) {
                *v = (a + b) % 6;
            }
        }
        let m = FiniteMonoid::new(t, 0).unwrap();
        assert_eq!(m.idempotent_power(), 6);
        // a nilpotent chain x, x², x³ = 0 needs ω ≥ 3
        let t = vec![vec![0, 1, 2, 3], vec![1, 2, 3, 3], vec![2, 3, 3, 3], vec![3, 3, 3, 3]];
        let m = FiniteMonoid::new(t, 0).unwrap();
        assert_eq!(m.idempotent_power(), 3);
    }

    #[test]
    fn submonoid_closure() {
        let m = example22();
        let (s, emb) = m.submonoid(&[1]);
        assert_eq!(s.size(), 2);
        assert_eq!(emb, vec![0, 1]);
        let (s, _) = m.submonoid(&[]);
        assert_eq!(s.size(), 1);
    }
}
