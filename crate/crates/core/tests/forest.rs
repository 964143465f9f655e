mod common;

use common::{all_words, forest_laws};
use pebblekit::forest::{build_forest, Forest, NodeKind, NodeRef, Tree};
use pebblekit::machines::zoo::{example22, zoo_morphism, MORPHISMS};
use pebblekit::monoid::{Alphabet, Morphism, Symbol};
use pebblekit::random::{random_forest, random_morphism, random_word};
use pebblekit::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FIG: &str = "((a)(a))((b)(c)((a)((c)(b)(b)(c)(b)))(b))";

/// Minimal height by trying every binary split and every split into three
/// or more blocks.
fn brute_height(mu: &Morphism, w: &[Symbol]) -> usize {
    if w.len() == 1 {
        return 1;
    }
    let mut best = usize::MAX;
    for j in 1..w.len() {
        best = best.min(1 + brute_height(mu, &w[..j]).max(brute_height(mu, &w[j..])));
    }
    let e = mu.eval(w);
    if mu.monoid().is_idempotent(e) {
        for cuts in 0u32..1 << (w.len() - 1) {
            if cuts.count_ones() < 2 {
                continue;
            }
            let mut start = 0;
            let mut h = 0;
            let mut ok = true;
            for k in 1..=w.len() {
                if k == w.len() || cuts >> (k - 1) & 1 == 1 {
                    if mu.eval(&w[start..k]) != e {
                        ok = false;
                        break;
                    }
                    h = h.max(brute_height(mu, &w[start..k]));
                    start = k;
                }
            }
            if ok {
                best = best.min(1 + h);
            }
        }
    }
    best
}

#[test]
fn example22_forest_queries() {
    let mu = example22();
    let f = Forest::parse(&mu, FIG).unwrap();
    assert!(f.validate());
    forest_laws(&f).unwrap();
    assert_eq!(f.serialize(), FIG);
    let node = f.node(&NodeRef(vec![1, 2])).unwrap();
    assert!(f.iterable_nodes().contains(&node));
    assert_eq!(f.frontier(node), vec![5, 6, 10]);
    assert_eq!(mu.alphabet().render_word(&f.frontier_word(node)), "acb");
    assert_eq!(f.dependency(node).len(), 5);
    let base = f.basis(node).unwrap();
    assert_eq!(f.path(base), NodeRef(vec![1]));
    assert_eq!(f.kind(base), NodeKind::Idempotent);
    assert_eq!(f.mid(node).unwrap(), node);
    let t = f.node_type(node).unwrap();
    assert_eq!((t.m_inner, t.n_inner), (0, 0));

    let built = build_forest(&mu, f.word()).unwrap();
    forest_laws(&built).unwrap();
    assert!(built.height() <= 9);
    assert!(built.height() <= f.height());
    assert_eq!(built, build_forest(&mu, f.word()).unwrap());
}

#[test]
fn root_and_leaf_queries() {
    let mu = example22();
    let f = Forest::parse(&mu, FIG).unwrap();
    let root = f.root();
    assert_eq!((f.left(root), f.right(root)), (0, 0));
    let fr = f.frontier(root);
    assert_eq!((fr[0], *fr.last().unwrap()), (1, 11));
    let leaf = f.node(&NodeRef(vec![0, 1])).unwrap();
    assert_eq!(f.frontier(leaf), vec![2]);
    assert!(f.basis(leaf).is_err());
    assert!(f.node_type(root).is_err());
    assert!(f.node(&NodeRef(vec![0, 2])).is_err());
    for id in f.nodes() {
        assert_eq!(f.node(&f.path(id)).unwrap(), id);
    }
}

#[test]
fn invalid_trees() {
    let mu = example22();
    let f = Forest::parse(&mu, FIG).unwrap();
    let Tree::Node(mut top) = f.tree() else { panic!() };
    let Tree::Node(base) = &mut top[1] else { panic!() };
    let Tree::Node(node) = &mut base[2] else { panic!() };
    let Tree::Node(inner) = &mut node[1] else { panic!() };
    inner.swap(0, 1);
    let permuted = Forest::from_tree(&mu, f.word(), &Tree::Node(top)).unwrap();
    assert!(!permuted.validate());

    // 2_M is not idempotent
    let a = Tree::Leaf(0);
    let bad = Forest::from_tree(&mu, &[0, 0, 0], &Tree::Node(vec![a.clone(), a.clone(), a])).unwrap();
    assert!(!bad.validate());
    assert!(Forest::parse(&mu, "(a)(a)(a)").is_err());
    assert!(Forest::from_tree(&mu, &[0, 0], &Tree::Leaf(0)).is_err());
}

#[test]
fn serialization() {
    let mu = example22();
    let leaf = build_forest(&mu, &[0]).unwrap();
    assert_eq!(leaf.serialize(), "(a)");
    assert_eq!(Forest::parse(&mu, "(a)").unwrap(), leaf);
    assert_eq!(Forest::parse(&mu, "a").unwrap(), leaf);
    assert!(leaf.iterable_nodes().is_empty());
    for bad in ["", "((a)", "(a))", "()", "(a)b", "(ab)", "(x)", "((a))(b)", "(a)(b)(b)"] {
        match Forest::parse(&mu, bad) {
            Err(Error::MalformedForest { .. }) | Err(Error::InvalidNode(_)) => {}
            other => panic!("{bad:?} parsed to {other:?}"),
        }
    }
    let Err(Error::MalformedForest { offset, .. }) = Forest::parse(&mu, "(a)(b") else { panic!() };
    assert_eq!(offset, 5);

    // marked letters
    let marked = Morphism::trivial(Alphabet::from_letters("ab").unwrap().marked().unwrap());
    let w = marked.alphabet().parse_word("ab\u{304}a").unwrap();
    let f = build_forest(&marked, &w).unwrap();
    assert_eq!(f.serialize(), "(a)(b\u{304})(a)");
    assert_eq!(Forest::parse(&marked, &f.serialize()).unwrap(), f);
}

#[test]
fn binary_forests_have_no_iterable_nodes() {
    let mu = Morphism::trivial(Alphabet::from_letters("ab").unwrap());
    let tree = Tree::Node(vec![Tree::Node(vec![Tree::Leaf(0), Tree::Leaf(1)]), Tree::Leaf(0)]);
    let f = Forest::from_tree(&mu, &[0, 1, 0], &tree).unwrap();
    assert!(f.validate());
    assert!(f.iterable_nodes().is_empty());
    assert_eq!(f.parti(), vec![f.root()]);
    assert!(f.partition_check());
    let singleton = build_forest(&mu, &[0, 1, 1]).unwrap();
    assert_eq!(singleton.height(), 2);
    assert_eq!(singleton.kind(singleton.root()), NodeKind::Idempotent);
}

#[test]
fn heights_are_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let ab = Alphabet::from_letters("ab").unwrap();
    let mut morphisms = vec![example22()];
    morphisms.extend((0..4).map(|_| random_morphism(&mut rng, &ab, 3)));
    for mu in &morphisms {
        for w in all_words(mu.alphabet().len(), 6).into_iter().skip(1) {
            let f = build_forest(mu, &w).unwrap();
            assert_eq!(f.height(), brute_height(mu, &w), "{}", f);
        }
    }
}

#[test]
fn zoo_morphism_forests() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for name in MORPHISMS {
        let mu = zoo_morphism(name).unwrap();
        let bound = 3 * mu.monoid().size();
        for _ in 0..200 {
            let mut w = random_word(&mut rng, mu.alphabet(), 24);
            if w.is_empty() {
                w.push(0);
            }
            let f = build_forest(&mu, &w).unwrap();
            assert!(f.height() <= bound, "{name}: {f}");
            forest_laws(&f).unwrap();
            assert_eq!(Forest::parse(&mu, &f.serialize()).unwrap(), f);
        }
    }
}

#[test]
fn random_forests() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let abc = Alphabet::from_letters("abc").unwrap();
    for round in 0..1000 {
        let mu = if round % 2 == 0 { example22() } else { random_morphism(&mut rng, &abc, 2) };
        let mut w = random_word(&mut rng, mu.alphabet(), 16);
        if w.is_empty() {
            w.push(1);
        }
        let f = random_forest(&mut rng, &mu, &w).unwrap();
        forest_laws(&f).unwrap();
        assert_eq!(Forest::parse(&mu, &f.serialize()).unwrap(), f);
    }
}

proptest! {
    #[test]
    fn trivial_monoid_forests(w in proptest::collection::vec(0usize..3, 1..40)) {
        let mu = Morphism::trivial(Alphabet::from_letters("abc").unwrap());
        let f = build_forest(&mu, &w).unwrap();
        prop_assert!(f.height() <= 2);
        prop_assert!(forest_laws(&f).is_ok());
    }
}
