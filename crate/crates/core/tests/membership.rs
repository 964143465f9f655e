mod common;

use common::all_words;
use num_bigint::BigUint;
use pebblekit::forest::{build_forest, Forest, NodeRef};
use pebblekit::machines::zoo::zoo_bimachine;
use pebblekit::machines::{Kind, NestedBimachine};
use pebblekit::membership::*;
use pebblekit::monoid::{Alphabet, Morphism, Symbol};
use pebblekit::random::{random_forest, random_machine, random_word, MachineShape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MARBLE: [&str; 5] = ["letter-product-marble", "square", "product", "triangular-sum", "iterated-square-plus-nba"];

fn normalized(name: &str) -> NormalizedMachine {
    NormalizedMachine::new(&zoo_bimachine(name).unwrap()).unwrap()
}

fn n(x: u32) -> BigUint {
    BigUint::from(x)
}

fn word(t: &NormalizedMachine, s: &str) -> Vec<Symbol> {
    t.alphabet().parse_word(s).unwrap()
}

/// prod(i, j) read off the original machine, with its own morphisms.
fn oracle_prod(b: &NestedBimachine, w: &[Symbol], i: usize, j: usize) -> BigUint {
    let mu = b.morphism();
    let f = b.call(mu.eval(&w[..j - 1]), w[j - 1], mu.eval(&w[j..]));
    let ext = &b.externals()[f];
    let nu = ext.morphism();
    ext.value(nu.eval(&w[..i - 1]), w[i - 1], nu.eval(&w[i..j])).clone()
}

#[test]
fn normalization() {
    assert_eq!(normalized("triangular-sum").monoid().size(), 1);
    assert_eq!(normalized("square").monoid().size(), 2);
    for name in MARBLE {
        let b = zoo_bimachine(name).unwrap();
        let t = NormalizedMachine::new(&b).unwrap();
        assert!(t.morphism().is_surjective());
        for w in all_words(b.alphabet().len(), 8) {
            assert_eq!(t.eval(&w), b.eval(&w), "{name}");
        }
    }
    for name in ["nb-a", "letter-product-blind"] {
        assert!(NormalizedMachine::new(&zoo_bimachine(name).unwrap()).is_err());
    }
}

#[test]
fn positions() {
    let t = normalized("triangular-sum");
    let ab = word(&t, "ab");
    assert_eq!(prod_positions(&t, &ab, 1, 2).unwrap(), n(1));
    assert_eq!(prod_positions(&t, &ab, 2, 2).unwrap(), n(0));
    assert!(prod_positions(&t, &ab, 2, 1).is_err());
    assert!(prod_positions(&t, &ab, 0, 1).is_err());
    assert!(prod_positions(&t, &ab, 1, 3).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for name in MARBLE {
        let b = zoo_bimachine(name).unwrap();
        let t = NormalizedMachine::new(&b).unwrap();
        for _ in 0..50 {
            let w = random_word(&mut rng, b.alphabet(), 12);
            let p = Productions::new(&t, &w);
            for j in 1..=w.len() {
                for i in 1..=j {
                    assert_eq!(*p.get(i, j), oracle_prod(&b, &w, i, j));
                }
            }
        }
    }
}

#[test]
fn worked_bitypes() {
    let t = normalized("triangular-sum");
    let bt = |u1: &str, u2: &str| Bitype { left: 0, u1: word(&t, u1), mid: 0, u2: word(&t, u2), right: 0 };
    assert_eq!(prod_bitype(&t, &bt("a", "b")), n(1));
    assert_eq!(prod_bitype(&t, &bt("b", "a")), n(0));
    assert_eq!(prod_monotype(&t, &Monotype { left: 0, v: word(&t, "ab"), right: 0 }), n(1));

    // 1_M is 0 and 2_M is 1
    let t = normalized("iterated-square-plus-nba");
    let a = word(&t, "a");
    let bt = |mid| Bitype { left: 1, u1: a.clone(), mid, u2: a.clone(), right: 1 };
    assert_eq!(prod_bitype(&t, &bt(1)), n(0));
    assert_eq!(prod_bitype(&t, &bt(0)), n(2));
}

#[test]
fn monotypes_on_singleton_monoids() {
    for name in ["letter-product-marble", "triangular-sum"] {
        let t = normalized(name);
        for v in all_words(2, 7).into_iter().skip(1) {
            let p = Monotype { left: 0, v: v.clone(), right: 0 };
            assert_eq!(prod_monotype(&t, &p), t.original().eval(&v));
        }
    }
    // a lone position whose external is zero there
    let t = normalized("triangular-sum");
    assert_eq!(prod_monotype(&t, &Monotype { left: 0, v: word(&t, "a"), right: 0 }), n(0));
}

#[test]
fn bitypes_split_words() {
    // prod(m<u1>m'<u2>m'') is the production of u1 called from u2 inside a word
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for name in MARBLE {
        let b = zoo_bimachine(name).unwrap();
        let t = NormalizedMachine::new(&b).unwrap();
        for _ in 0..100 {
            let parts: Vec<Vec<Symbol>> = (0..5).map(|_| random_word(&mut rng, b.alphabet(), 4)).collect();
            if parts[1].is_empty() || parts[3].is_empty() {
                continue;
            }
            let w = parts.concat();
            let start1 = parts[0].len() + 1;
            let start2 = start1 + parts[1].len() + parts[2].len();
            let mut expected = BigUint::default();
            for j in start2..start2 + parts[3].len() {
                for i in start1..start1 + parts[1].len() {
                    expected += oracle_prod(&b, &w, i, j);
                }
            }
            let mu = t.morphism();
            let bitype = Bitype {
                left: mu.eval(&parts[0]),
                u1: parts[1].clone(),
                mid: mu.eval(&parts[2]),
                u2: parts[3].clone(),
                right: mu.eval(&parts[4]),
            };
            assert_eq!(prod_bitype(&t, &bitype), expected, "{name}");
        }
    }
}

#[test]
fn node_productions_sum_to_the_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let ab = Alphabet::from_letters("ab").unwrap();
    let shape = MachineShape { kind: Kind::Marble, level: 1, states: 2, externals: 3, max_output: 4 };
    for round in 0..1000 {
        let b = random_machine(&mut rng, &ab, &shape).unwrap();
        let t = NormalizedMachine::new(&b).unwrap();
        let mut w = random_word(&mut rng, &ab, 14);
        if w.is_empty() {
            w.push(0);
        }
        let f = if round % 2 == 0 {
            build_forest(t.morphism(), &w).unwrap()
        } else {
            random_forest(&mut rng, t.morphism(), &w).unwrap()
        };
        let p = Productions::new(&t, &w);
        let parti = f.parti();
        let mut total = BigUint::default();
        for &i in &parti {
            for &j in &parti {
                let v = p.nodes(&f, i, j);
                if f.max(j) < f.min(i) {
                    assert_eq!(v, BigUint::default());
                }
                total += v;
            }
        }
        assert_eq!(total, b.eval(&w));
        let d = decompose_forest(&t, &f);
        assert_eq!(&d.f_d + &d.f_l + &d.f_i, d.total);
    }
}

#[test]
fn pair_classes() {
    let t = normalized("letter-product-marble");
    let mu = t.morphism();
    let f = Forest::parse(mu, "(a)(b)(a)(b)(a)(b)").unwrap();
    let node = |p: &[usize]| f.node(&NodeRef(p.to_vec())).unwrap();
    let root = f.root();
    assert_eq!(classify_pair(&f, root, root).unwrap(), PairClass::L);
    assert_eq!(classify_pair(&f, node(&[1]), node(&[2])).unwrap(), PairClass::L);
    assert_eq!(classify_pair(&f, node(&[1]), node(&[3])).unwrap(), PairClass::I);
    assert_eq!(classify_pair(&f, node(&[4]), node(&[1])).unwrap(), PairClass::I);
    assert_eq!(classify_pair(&f, node(&[2]), node(&[2])).unwrap(), PairClass::L);
    assert!(classify_pair(&f, node(&[0]), root).is_err());
    assert!(typed_production(&t, &f, node(&[1]), node(&[2])).is_err());
    let p = Productions::new(&t, f.word());
    for (i, j) in [(1, 3), (1, 4), (2, 4)] {
        let (x, y) = (node(&[i]), node(&[j]));
        assert_eq!(typed_production(&t, &f, x, y).unwrap(), p.nodes(&f, x, y));
    }

    let g = Forest::parse(mu, "((a)(a)(b))((b)(a)(a))").unwrap();
    let node = |p: &[usize]| g.node(&NodeRef(p.to_vec())).unwrap();
    assert_eq!(classify_pair(&g, node(&[0, 1]), node(&[1, 1])).unwrap(), PairClass::D);
    assert_eq!(classify_pair(&g, g.root(), node(&[1, 1])).unwrap(), PairClass::L);

    // classes are exclusive and cover parti(F)² on random forests
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    for _ in 0..100 {
        let w = [random_word(&mut rng, mu.alphabet(), 20), vec![0]].concat();
        let f = random_forest(&mut rng, mu, &w).unwrap();
        for &i in &f.parti() {
            for &j in &f.parti() {
                let c = classify_pair(&f, i, j).unwrap();
                let both_iterable = i != f.root() && j != f.root();
                let d = both_iterable && f.basis(i).unwrap() != f.basis(j).unwrap();
                let l = f.up(i).contains(&j) || f.up(j).contains(&i);
                let expected = if d {
                    PairClass::D
                } else if l {
                    PairClass::L
                } else {
                    PairClass::I
                };
                assert_eq!(c, expected);
                assert_eq!(classify_pair(&f, j, i).unwrap(), c);
            }
        }
    }
}

#[test]
fn decomposition_law() {
    let single = decompose(&normalized("letter-product-marble"), &[0]).unwrap();
    assert_eq!((single.f_d.clone(), single.f_i.clone()), (n(0), n(0)));
    assert_eq!(single.f_l, single.total);
    assert!(decompose(&normalized("triangular-sum"), &[]).is_err());
    for name in ["triangular-sum", "letter-product-marble", "product"] {
        let t = normalized(name);
        for w in all_words(2, 8).into_iter().skip(1) {
            let d = decompose(&t, &w).unwrap();
            assert_eq!(&d.f_d + &d.f_l + &d.f_i, d.total, "{name}");
            assert_eq!(d.total, t.original().eval(&w));
        }
    }
}

#[test]
fn triangular_sum_is_not_symmetric() {
    let t = normalized("triangular-sum");
    let r = check_symmetry(&t, SymmetryOptions::default()).unwrap();
    assert_eq!(r.verdict, SymmetryVerdict::NotSymmetric);
    let w = r.witness.unwrap();
    assert_eq!((w.u1.clone(), w.u2.clone()), (word(&t, "a"), word(&t, "b")));
    assert_eq!(w.context, Context { m: 0, n: 0, m1: 0, n1: 0, m2: 0, n2: 0 });
    assert_eq!((w.first.production.clone(), w.second.production.clone()), (n(1), n(0)));
    assert_eq!((w.first.family, w.second.family), (Family::First, Family::Second));
    assert!(verify_symmetry_witness(&t, &w));
    let mut forged = w.clone();
    forged.second.production = n(1);
    assert!(!verify_symmetry_witness(&t, &forged));
    let v = membership_verdict(t.original(), SymmetryOptions::default()).unwrap();
    assert_eq!(v.membership, Membership::NotBlind);
}

#[test]
fn iterated_square_is_not_symmetric() {
    let t = normalized("iterated-square-plus-nba");
    let r = check_symmetry(&t, SymmetryOptions::default()).unwrap();
    assert_eq!(r.verdict, SymmetryVerdict::NotSymmetric);
    let w = r.witness.unwrap();
    assert!(verify_symmetry_witness(&t, &w));
    let a = word(&t, "a");
    assert_eq!((w.u1.clone(), w.u2.clone()), (a.clone(), a));
    let mut by_p = [(w.first.p, w.first.production.clone()), (w.second.p, w.second.production.clone())];
    by_p.sort();
    assert_eq!(by_p, [(0, n(2)), (1, n(0))]);
}

#[test]
fn symmetric_machines() {
    let t = normalized("letter-product-marble");
    assert_eq!(default_bound(&t), 8);
    let r = check_symmetry(&t, SymmetryOptions::default()).unwrap();
    assert_eq!(r.verdict, SymmetryVerdict::SymmetricComplete);
    assert_eq!(r.bound, 8);
    assert!(r.witness.is_none());
    // 510 nonempty words of length ≤ 8, one context each
    assert_eq!(r.k_table.len(), 510 * 510);
    let ab = word(&t, "ab");
    let c = Context { m: 0, n: 0, m1: 0, n1: 0, m2: 0, n2: 0 };
    // a·b productions: |u1|_a |u2|_b from u1 before u2
    assert_eq!(r.k_table.get(&c, &ab, &word(&t, "bb")), Some(&n(2)));

    let up_to = check_symmetry(&t, SymmetryOptions { bound: Some(3), jobs: Some(2) }).unwrap();
    assert_eq!(up_to.verdict, SymmetryVerdict::SymmetricUpToBound);
    assert_eq!(up_to.k_table.len(), 14 * 14);

    let square = normalized("square");
    assert_eq!(default_bound(&square), 6);
    let r = check_symmetry(&square, SymmetryOptions { bound: Some(12), jobs: None }).unwrap();
    assert_eq!(r.verdict, SymmetryVerdict::SymmetricUpToBound);
    let v = membership_verdict(square.original(), SymmetryOptions { bound: Some(12), jobs: None }).unwrap();
    assert_eq!(v.membership, Membership::Inconclusive);
    assert!(!v.type_table.is_empty());
}

#[test]
fn search_is_deterministic() {
    for name in ["product", "iterated-square-plus-nba", "triangular-sum"] {
        let t = normalized(name);
        let one = check_symmetry(&t, SymmetryOptions { bound: Some(4), jobs: Some(1) }).unwrap();
        let many = check_symmetry(&t, SymmetryOptions { bound: Some(4), jobs: Some(4) }).unwrap();
        assert_eq!(one.verdict, many.verdict, "{name}");
        assert_eq!(one.witness, many.witness, "{name}");
        assert_eq!(one.k_table.len(), many.k_table.len(), "{name}");
        if let Some(w) = &one.witness {
            assert!(verify_symmetry_witness(&t, w));
        }
    }
}

#[test]
fn random_witnesses_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let ab = Alphabet::from_letters("ab").unwrap();
    let shape = MachineShape { kind: Kind::Marble, level: 1, states: 2, externals: 2, max_output: 3 };
    let mut negatives = 0;
    for _ in 0..20 {
        let b = random_machine(&mut rng, &ab, &shape).unwrap();
        let t = NormalizedMachine::new(&b).unwrap();
        let r = check_symmetry(&t, SymmetryOptions { bound: Some(3), jobs: None }).unwrap();
        if let Some(w) = &r.witness {
            negatives += 1;
            assert!(verify_symmetry_witness(&t, w));
        }
    }
    assert!(negatives > 0);
}

#[test]
fn type_determinism_on_a_symmetric_machine() {
    let t = normalized("letter-product-marble");
    let report = membership_verdict(t.original(), SymmetryOptions::default()).unwrap();
    assert_eq!(report.membership, Membership::Blind);
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    let forests: Vec<Forest> = (0..200)
        .map(|_| {
            let mut w = random_word(&mut rng, t.alphabet(), 24);
            w.push(1);
            random_forest(&mut rng, t.morphism(), &w).unwrap()
        })
        .collect();
    let check = check_type_determinism(&t, &forests);
    assert!(check.pairs > 100);
    assert!(check.violations.is_empty());
    // the certificate agrees wherever it covers the pair
    let mut covered = 0;
    for ((t1, t2), v) in &check.table {
        let key = {
            let (a, b) = (TypeKey::from(t1), TypeKey::from(t2));
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        };
        if let Some(k) = report.type_table.get(&key) {
            covered += 1;
            assert_eq!(k, v);
        }
    }
    assert!(covered > 0);
}

#[test]
fn monotype_on_a_word_context() {
    // prod(m<v>m') is the production of v on itself inside u v u'
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let ab = Alphabet::from_letters("ab").unwrap();
    let mu_shape = MachineShape::default();
    for _ in 0..50 {
        let b = random_machine(&mut rng, &ab, &mu_shape).unwrap();
        let t = NormalizedMachine::new(&b).unwrap();
        let (u, v, x) = (random_word(&mut rng, &ab, 4), random_word(&mut rng, &ab, 5), random_word(&mut rng, &ab, 4));
        if v.is_empty() {
            continue;
        }
        let w = [u.as_slice(), &v, &x].concat();
        let mut expected = BigUint::default();
        for j in u.len() + 1..=u.len() + v.len() {
            for i in u.len() + 1..=j {
                expected += oracle_prod(&b, &w, i, j);
            }
        }
        let mu: &Morphism = t.morphism();
        let p = Monotype { left: mu.eval(&u), v, right: mu.eval(&x) };
        assert_eq!(prod_monotype(&t, &p), expected);
    }
}
