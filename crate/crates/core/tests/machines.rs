use std::sync::Arc;

use num_bigint::BigUint;
use pebblekit::machines::zoo::{self, zoo_bimachine, ZooMachine};
use pebblekit::machines::{linear_combination, Kind, MarkedWord, NestedBimachine};
use pebblekit::monoid::{Alphabet, FiniteMonoid, Morphism, Symbol};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ab() -> Alphabet {
    Alphabet::from_letters("ab").unwrap()
}

fn n(x: u64) -> BigUint {
    BigUint::from(x)
}

/// Σ n_i² over the a-blocks, as a one-marble machine over {1, A, Z}.
fn iterated_square() -> NestedBimachine {
    let m = FiniteMonoid::new(vec![vec![0, 1, 2], vec![1, 1, 2], vec![2, 2, 2]], 0).unwrap();
    let mu = Morphism::new(ab(), Arc::new(m), vec![1, 2]).unwrap();
    let odd = NestedBimachine::from_fn(Kind::Marble, mu.clone(), |_, a, n| match (a, n) {
        (0, 0) => 1u32,
        (0, 1) => 2,
        _ => 0,
    })
    .unwrap();
    let zero = NestedBimachine::from_fn(Kind::Marble, mu.clone(), |_, _, _| 0u32).unwrap();
    NestedBimachine::from_calls(Kind::Marble, mu, vec![odd, zero], |_, a, _| a).unwrap()
}

/// |w|_a as a one-marble machine.
fn nb_a_marble() -> NestedBimachine {
    let m = FiniteMonoid::new(vec![vec![0, 1], vec![1, 1]], 0).unwrap();
    let mu = Morphism::new(ab(), Arc::new(m), vec![1, 1]).unwrap();
    let last_is_a = NestedBimachine::from_fn(Kind::Marble, mu.clone(), |_, a, n| u32::from(a == 0 && n == 0)).unwrap();
    NestedBimachine::from_calls(Kind::Marble, mu, vec![last_is_a], |_, _, _| 0).unwrap()
}

fn random_word(rng: &mut ChaCha8Rng, letters: usize, max: usize) -> Vec<Symbol> {
    let len = rng.gen_range(0..=max);
    (0..len).map(|_| rng.gen_range(0..letters)).collect()
}

#[test]
fn iterated_square_sum() {
    let f = linear_combination(&[n(1), n(1)], &[&iterated_square(), &nb_a_marble()]).unwrap();
    assert_eq!(f.eval_str("aab").unwrap(), n(6));
    let reference = zoo_bimachine("iterated-square-plus-nba").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let w = random_word(&mut rng, 2, 20);
        assert_eq!(f.eval(&w), reference.eval(&w));
    }
}

#[test]
fn scaled_and_trivial_combinations() {
    let nba = zoo_bimachine("nb-a").unwrap();
    let twice = linear_combination(&[n(2)], &[&nba]).unwrap();
    assert_eq!(twice.eval_str("aba").unwrap(), n(4));
    let tri = zoo_bimachine("triangular-sum").unwrap();
    let prod = zoo_bimachine("product").unwrap();
    let only_tri = linear_combination(&[n(1), n(0)], &[&tri, &prod]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..300 {
        let w = random_word(&mut rng, 2, 16);
        assert_eq!(only_tri.eval(&w), tri.eval(&w));
    }
}

#[test]
fn incompatible_combinations_rejected() {
    let tri = zoo_bimachine("triangular-sum").unwrap();
    let blind = zoo_bimachine("letter-product-blind").unwrap();
    let nba = zoo_bimachine("nb-a").unwrap();
    let square = zoo_bimachine("square").unwrap();
    assert!(linear_combination(&[n(1), n(1)], &[&tri, &blind]).is_err());
    assert!(linear_combination(&[n(1), n(1)], &[&tri, &nba]).is_err());
    assert!(linear_combination(&[n(1), n(1)], &[&tri, &square]).is_err());
    assert!(linear_combination(&[n(1)], &[&tri, &tri]).is_err());
}

/// The blind letter-product with its externals lifted to ignore the mark.
fn letter_product_pebble() -> NestedBimachine {
    let blind = zoo_bimachine("letter-product-blind").unwrap();
    let externals = blind.externals().iter().map(|e| e.lift_to_marked().unwrap()).collect();
    NestedBimachine::from_calls(Kind::Pebble, blind.morphism().clone(), externals, |m, a, n| blind.call(m, a, n))
        .unwrap()
}

#[test]
fn mark_blind_pebble_equals_blind() {
    let blind = zoo_bimachine("letter-product-blind").unwrap();
    let pebble = letter_product_pebble();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..500 {
        let w = random_word(&mut rng, 2, 25);
        assert_eq!(pebble.eval(&w), blind.eval(&w));
    }
}

#[test]
fn lifted_pebble_machine_ignores_outer_mark() {
    let pebble = letter_product_pebble();
    let lifted = pebble.lift_to_marked().unwrap();
    let marked = ab().marked().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..300 {
        let w = random_word(&mut rng, 4, 15);
        let plain: Vec<Symbol> = w.iter().map(|&s| s % 2).collect();
        assert_eq!(lifted.eval(&w), pebble.eval(&plain), "{}", marked.render_word(&w));
    }
}

#[test]
fn pebble_machine_reads_the_mark() {
    // counts letters strictly before the pebble: Σ_i (i - 1)
    let a = Alphabet::from_letters("a").unwrap();
    let marked = a.marked().unwrap();
    let flag = Arc::new(FiniteMonoid::new(vec![vec![0, 1], vec![1, 1]], 0).unwrap());
    let mu = Morphism::new(marked.clone(), flag, vec![0, 1]).unwrap();
    let before = NestedBimachine::from_fn(Kind::Pebble, mu, |_, s, n| u32::from(s == 0 && n == 1)).unwrap();
    let main = NestedBimachine::from_calls(Kind::Pebble, Morphism::trivial(a), vec![before], |_, _, _| 0).unwrap();
    assert_eq!(main.eval_str("aaaa").unwrap(), n(6));
}

#[test]
fn twoway_conversions() {
    for name in zoo::TWOWAY {
        let ZooMachine::TwoWay(t) = zoo::zoo(name).unwrap() else { panic!() };
        let b = t.to_bimachine().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let w = random_word(&mut rng, t.alphabet().len(), 40);
            assert_eq!(b.eval(&w), t.eval(&w));
        }
    }
}

#[test]
fn marked_word_rendering() {
    let a = ab();
    let w = a.parse_word("ab").unwrap();
    assert_eq!(MarkedWord::new(w.clone(), 1).unwrap().render(&a).unwrap(), "a\u{304}b");
    assert_eq!(MarkedWord::new(w.clone(), 2).unwrap().render(&a).unwrap(), "ab\u{304}");
    assert!(MarkedWord::new(w.clone(), 0).is_err());
    assert!(MarkedWord::new(w, 3).is_err());
}

#[test]
fn eval_rejects_foreign_letters() {
    let b = zoo_bimachine("triangular-sum").unwrap();
    assert!(b.eval_str("abc").is_err());
    assert!(b.eval_word(&[0, 5]).is_err());
}

proptest! {
    #[test]
    fn marked_word_round_trip(w in prop::collection::vec(0usize..3, 1..12), i in 0usize..12) {
        let a = Alphabet::from_letters("xyz").unwrap();
        let i = i % w.len() + 1;
        let mw = MarkedWord::new(w.clone(), i).unwrap();
        let back = MarkedWord::unmark(&a, &mw.symbols(&a)).unwrap();
        prop_assert_eq!(back, mw);
    }

    #[test]
    fn linear_combination_is_pointwise(
        c in prop::collection::vec(0u64..5, 4),
        w in prop::collection::vec(0usize..2, 0..14),
    ) {
        let names = ["letter-product-marble", "product", "triangular-sum", "iterated-square-plus-nba"];
        let machines: Vec<NestedBimachine> = names.iter().map(|n| zoo_bimachine(n).unwrap()).collect();
        let refs: Vec<&NestedBimachine> = machines.iter().collect();
        let coeffs: Vec<BigUint> = c.iter().map(|&x| n(x)).collect();
        let f = linear_combination(&coeffs, &refs).unwrap();
        let expect: BigUint = machines.iter().zip(&coeffs).map(|(m, k)| k * m.eval(&w)).sum();
        prop_assert_eq!(f.eval(&w), expect);
    }
}
