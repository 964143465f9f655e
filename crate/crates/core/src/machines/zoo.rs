//! Built-in machines with closed-form reference functions.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;

use super::{Kind, Move, NestedBimachine, TapeSymbol, TwoWayTransducer};
use crate::error::{Error, Result};
use crate::monoid::{Alphabet, FiniteMonoid, Morphism};

/// Names of the built-in bimachines.
pub const BIMACHINES: [&str; 7] = [
    "nb-a",
    "letter-product-blind",
    "letter-product-marble",
    "square",
    "product",
    "triangular-sum",
    "iterated-square-plus-nba",
];

/// Names of the built-in two-way transducers.
pub const TWOWAY: [&str; 2] = ["nb-a-twoway", "three-sweep"];

/// Names accepted by [`zoo_morphism`].
pub const MORPHISMS: [&str; 8] = [
    "example22",
    "nb-a",
    "letter-product-blind",
    "letter-product-marble",
    "square",
    "product",
    "triangular-sum",
    "iterated-square-plus-nba",
];

#[derive(Clone, Debug)]
pub enum ZooMachine {
    Bimachine(NestedBimachine),
    TwoWay(TwoWayTransducer),
}

fn ab() -> Alphabet {
    Alphabet::from_letters("ab").unwrap()
}

fn counter(alphabet: &Alphabet, letter: char) -> NestedBimachine {
    let c = alphabet.symbol(letter).unwrap();
    NestedBimachine::from_fn(Kind::Marble, Morphism::trivial(alphabet.clone()), |_, a, _| u32::from(a == c)).unwrap()
}

fn zero(alphabet: &Alphabet) -> NestedBimachine {
    NestedBimachine::from_fn(Kind::Marble, Morphism::trivial(alphabet.clone()), |_, _, _| 0u32).unwrap()
}

fn monoid(table: Vec<Vec<usize>>) -> Arc<FiniteMonoid> {
    Arc::new(FiniteMonoid::new(table, 0).unwrap())
}

/// {1, x} with x idempotent.
fn flag_monoid() -> Arc<FiniteMonoid> {
    monoid(vec![vec![0, 1], vec![1, 1]])
}

/// Syntactic monoid of a*b*: 1, A, B, AB, 0.
fn astar_bstar() -> Arc<FiniteMonoid> {
    monoid(vec![
        vec![0, 1, 2, 3, 4],
        vec![1, 1, 3, 3, 4],
        vec![2, 4, 2, 4, 4],
        vec![3, 4, 3, 4, 4],
        vec![4, 4, 4, 4, 4],
    ])
}

fn build(name: &str) -> Result<ZooMachine> {
    let ab = ab();
    let m = match name {
        "nb-a" => counter(&ab, 'a'),
        "letter-product-blind" => NestedBimachine::from_calls(
            Kind::Blind,
            Morphism::trivial(ab.clone()),
            vec![zero(&ab), counter(&ab, 'b')],
            |_, a, _| usize::from(a == 0),
        )?,
        "letter-product-marble" => NestedBimachine::from_calls(
            Kind::Marble,
            Morphism::trivial(ab.clone()),
            vec![counter(&ab, 'a'), counter(&ab, 'b')],
            |_, a, _| usize::from(a == 0),
        )?,
        "square" => {
            let a = Alphabet::from_letters("a")?;
            let mu = Morphism::new(a.clone(), flag_monoid(), vec![1])?;
            // Called on a^i, outputs 2i - 1: 2 per a followed by more input, 1 at the end.
            let odd = NestedBimachine::from_fn(Kind::Marble, mu.clone(), |_, _, n| if n == 0 { 1u32 } else { 2 })?;
            NestedBimachine::from_calls(Kind::Marble, mu, vec![odd], |_, _, _| 0)?
        }
        "product" => {
            let mon = astar_bstar();
            let mu = Morphism::new(ab.clone(), mon.clone(), vec![1, 2])?;
            NestedBimachine::from_calls(Kind::Marble, mu, vec![zero(&ab), counter(&ab, 'a')], move |m, a, n| {
                usize::from(a == 1 && mon.product([m, 2, n]) != 4)
            })?
        }
        "triangular-sum" => NestedBimachine::from_calls(
            Kind::Marble,
            Morphism::trivial(ab.clone()),
            vec![zero(&ab), counter(&ab, 'a')],
            |_, a, _| usize::from(a == 1),
        )?,
        "iterated-square-plus-nba" => {
            let mu = Morphism::new(ab.clone(), flag_monoid(), vec![0, 1])?;
            // 2 per a with no b after it in the prefix.
            let tail =
                NestedBimachine::from_fn(Kind::Marble, mu.clone(), |_, a, n| if a == 0 && n == 0 { 2u32 } else { 0 })?;
            let none = NestedBimachine::from_fn(Kind::Marble, mu.clone(), |_, _, _| 0u32)?;
            NestedBimachine::from_calls(Kind::Marble, mu, vec![tail, none], |_, a, _| a)?
        }
        "nb-a-twoway" => {
            let mut t = TwoWayTransducer::new(ab, 1, 0, &[0])?;
            t.set_transition(0, TapeSymbol::LeftEnd, 0, Move::Right, 0u32)?;
            t.set_transition(0, TapeSymbol::Letter(0), 0, Move::Right, 1u32)?;
            t.set_transition(0, TapeSymbol::Letter(1), 0, Move::Right, 0u32)?;
            return Ok(ZooMachine::TwoWay(t));
        }
        "three-sweep" => {
            let abc = Alphabet::from_letters("abc")?;
            let mut t = TwoWayTransducer::new(abc, 3, 0, &[2])?;
            t.set_transition(0, TapeSymbol::LeftEnd, 0, Move::Right, 0u32)?;
            t.set_transition(0, TapeSymbol::RightEnd, 1, Move::Left, 0u32)?;
            t.set_transition(1, TapeSymbol::LeftEnd, 2, Move::Right, 0u32)?;
            for a in 0..3 {
                t.set_transition(0, TapeSymbol::Letter(a), 0, Move::Right, 1u32)?;
                t.set_transition(1, TapeSymbol::Letter(a), 1, Move::Left, 1u32)?;
                t.set_transition(2, TapeSymbol::Letter(a), 2, Move::Right, 1u32)?;
            }
            return Ok(ZooMachine::TwoWay(t));
        }
        _ => return Err(Error::MalformedMachine(format!("unknown zoo machine {name:?}"))),
    };
    Ok(ZooMachine::Bimachine(m))
}

/// A built-in machine by name.
pub fn zoo(name: &str) -> Result<ZooMachine> {
    build(name)
}

/// A built-in bimachine by name.
pub fn zoo_bimachine(name: &str) -> Result<NestedBimachine> {
    match build(name)? {
        ZooMachine::Bimachine(b) => Ok(b),
        ZooMachine::TwoWay(_) => Err(Error::MalformedMachine(format!("{name} is a two-way transducer"))),
    }
}

/// The `example22` morphism over {a, b, c}: 1_M, 2_M, 3_M are 0, 1, 2,
/// with 2_M² = 1_M and 3_M absorbing; a ↦ 2_M, b, c ↦ 3_M.
pub fn example22() -> Morphism {
    let m = monoid(vec![vec![0, 1, 2], vec![1, 0, 2], vec![2, 2, 2]]);
    Morphism::new(Alphabet::from_letters("abc").unwrap(), m, vec![1, 2, 2]).unwrap()
}

/// A built-in morphism: `example22`, or the shared morphism of a zoo
/// bimachine (the product of the morphisms of all its levels).
pub fn zoo_morphism(name: &str) -> Result<Morphism> {
    if name == "example22" {
        return Ok(example22());
    }
    let b = zoo_bimachine(name)?;
    if b.kind() == Kind::Pebble {
        return Ok(b.morphism().clone());
    }
    Ok(b.shared_morphism()?.morphism)
}

fn count(w: &str, c: char) -> u64 {
    w.chars().filter(|&x| x == c).count() as u64
}

/// Reference implementation of a zoo machine, on rendered words.
pub fn oracle(name: &str) -> Option<fn(&str) -> BigUint> {
    let f: fn(&str) -> BigUint = match name {
        "nb-a" | "nb-a-twoway" => |w| count(w, 'a').into(),
        "letter-product-blind" | "letter-product-marble" => |w| (count(w, 'a') * count(w, 'b')).into(),
        "square" => |w| {
            let n = BigUint::from(w.chars().count());
            &n * &n
        },
        "product" => |w| {
            let m = w.chars().take_while(|&c| c == 'a').count();
            if w.chars().skip(m).all(|c| c == 'b') {
                BigUint::from(m) * BigUint::from(w.chars().count() - m)
            } else {
                BigUint::zero()
            }
        },
        "triangular-sum" => |w| {
            let mut seen = 0u64;
            let mut total = BigUint::zero();
            for c in w.chars() {
                match c {
                    'a' => seen += 1,
                    _ => total += seen,
                }
            }
            total
        },
        "iterated-square-plus-nba" => |w| {
            w.split('b')
                .map(|block| {
                    let n = block.chars().count() as u64;
                    BigUint::from(n * (n + 1))
                })
                .sum()
        },
        "three-sweep" => |w| BigUint::from(3 * w.chars().count()),
        _ => return None,
    };
    Some(f)
}
