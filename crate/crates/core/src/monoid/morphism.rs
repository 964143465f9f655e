use std::sync::Arc;

use super::{generate, Alphabet, Element, FiniteMonoid, Symbol};
use crate::error::{Error, Result};

/// A morphism from the free monoid over `alphabet` into a finite monoid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    alphabet: Alphabet,
    monoid: Arc<FiniteMonoid>,
    image: Vec<Element>,
}

/// A co-restricted product morphism with its projections onto the factors.
#[derive(Clone, Debug)]
pub struct ProductMorphism {
    pub morphism: Morphism,
    /// `projections[j][x]` is the component of element `x` in factor `j`.
    pub projections: Vec<Vec<Element>>,
}

impl Morphism {
    pub fn new(alphabet: Alphabet, monoid: Arc<FiniteMonoid>, image: Vec<Element>) -> Result<Self> {
        if image.len() != alphabet.len() {
            return Err(Error::MalformedMonoid(format!(
                "morphism lists {} images for {} symbols",
                image.len(),
                alphabet.len()
            )));
        }
        if let Some(&x) = image.iter().find(|&&x| x >= monoid.size()) {
            return Err(Error::MalformedMonoid(format!("image {x} out of range")));
        }
        Ok(Morphism { alphabet, monoid, image })
    }

    /// The morphism into the trivial monoid.
    pub fn trivial(alphabet: Alphabet) -> Self {
        let image = vec![0; alphabet.len()];
        Morphism { alphabet, monoid: Arc::new(FiniteMonoid::trivial()), image }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn monoid(&self) -> &FiniteMonoid {
        &self.monoid
    }

    pub fn monoid_arc(&self) -> &Arc<FiniteMonoid> {
        &self.monoid
    }

    pub fn image(&self) -> &[Element] {
        &self.image
    }

    #[inline]
    pub fn letter(&self, a: Symbol) -> Element {
        self.image[a]
    }

    /// μ(w); panics on symbols outside the alphabet.
    pub fn eval(&self, w: &[Symbol]) -> Element {
        self.monoid.product(w.iter().map(|&a| self.image[a]))
    }

    /// μ(w) with the alphabet checked.
    pub fn eval_word(&self, w: &[Symbol]) -> Result<Element> {
        self.alphabet.check_word(w)?;
        Ok(self.eval(w))
    }

    pub fn eval_str(&self, w: &str) -> Result<Element> {
        Ok(self.eval(&self.alphabet.parse_word(w)?))
    }

    /// `prefixes(w)[i] = μ(w[..i])` for `i` in `0..=|w|`.
    pub fn prefixes(&self, w: &[Symbol]) -> Vec<Element> {
        let mut out = Vec::with_capacity(w.len() + 1);
        let mut acc = self.monoid.identity();
        out.push(acc);
        for &a in w {
            acc = self.monoid.mul(acc, self.image[a]);
            out.push(acc);
        }
        out
    }

    /// `suffixes(w)[i] = μ(w[i..])` for `i` in `0..=|w|`.
    pub fn suffixes(&self, w: &[Symbol]) -> Vec<Element> {
        let mut out = vec![self.monoid.identity(); w.len() + 1];
        for i in (0..w.len()).rev() {
            out[i] = self.monoid.mul(self.image[w[i]], out[i + 1]);
        }
        out
    }

    /// Whether the letter images generate the whole codomain.
    pub fn is_surjective(&self) -> bool {
        self.monoid.submonoid(&self.image).0.size() == self.monoid.size()
    }

    /// Restricts the codomain to the generated submonoid. Returns the new
    /// morphism and the embedding of its elements into the old codomain.
    pub fn co_restrict(&self) -> (Morphism, Vec<Element>) {
        let (sub, emb) = self.monoid.submonoid(&self.image);
        let image = self.image.iter().map(|x| emb.iter().position(|y| y == x).unwrap()).collect();
        (Morphism { alphabet: self.alphabet.clone(), monoid: Arc::new(sub), image }, emb)
    }

    /// Product of two morphisms co-restricted to the generated submonoid.
    pub fn product(&self, other: &Morphism) -> Result<ProductMorphism> {
        Morphism::product_all(&[self, other])
    }

    /// Product of several morphisms over the same alphabet, co-restricted to
    /// the generated submonoid. Element 0 of the result is the identity.
    pub fn product_all(factors: &[&Morphism]) -> Result<ProductMorphism> {
        let Some(first) = factors.first() else {
            return Err(Error::AlphabetMismatch("empty product".into()));
        };
        let alphabet = first.alphabet.clone();
        if let Some(f) = factors.iter().find(|f| f.alphabet != alphabet) {
            return Err(Error::AlphabetMismatch(format!("{} vs {}", alphabet, f.alphabet)));
        }
        let identity: Vec<Element> = factors.iter().map(|f| f.monoid.identity()).collect();
        let gens: Vec<Vec<Element>> =
            alphabet.symbols().map(|a| factors.iter().map(|f| f.image[a]).collect()).collect();
        let g = generate(identity, &gens, |x, y| {
            factors.iter().enumerate().map(|(j, f)| f.monoid.mul(x[j], y[j])).collect()
        });
        let projections = (0..factors.len()).map(|j| g.elements.iter().map(|t| t[j]).collect()).collect();
        let morphism = Morphism { alphabet, monoid: Arc::new(g.monoid), image: g.generators };
        Ok(ProductMorphism { morphism, projections })
    }

    /// The same morphism read over `alphabet.marked()`, ignoring marks.
    pub fn lift_to_marked(&self) -> Result<Morphism> {
        let marked = self.alphabet.marked()?;
        let image = marked.symbols().map(|s| self.image[s % self.alphabet.len()]).collect();
        Ok(Morphism { alphabet: marked, monoid: self.monoid.clone(), image })
    }
}
