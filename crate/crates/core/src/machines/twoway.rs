use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::Zero;

use super::{Kind, NestedBimachine};
use crate::error::{Error, Result};
use crate::monoid::{generate, Alphabet, Morphism, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
}

/// A tape cell: an endmarker or a letter of the input alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TapeSymbol {
    LeftEnd,
    Letter(Symbol),
    RightEnd,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub target: usize,
    pub direction: Move,
    pub output: BigUint,
}

/// Deterministic two-way transducer with unary output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoWayTransducer {
    alphabet: Alphabet,
    states: usize,
    initial: usize,
    finals: Vec<bool>,
    /// Indexed by `state * (|A| + 2) + column`.
    delta: Vec<Option<Transition>>,
}

impl TwoWayTransducer {
    pub fn new(alphabet: Alphabet, states: usize, initial: usize, finals: &[usize]) -> Result<Self> {
        if initial >= states {
            return Err(Error::MalformedMachine(format!("initial state {initial} out of range")));
        }
        let mut f = vec![false; states];
        for &q in finals {
            *f.get_mut(q).ok_or_else(|| Error::MalformedMachine(format!("final state {q} out of range")))? = true;
        }
        let width = alphabet.len() + 2;
        Ok(TwoWayTransducer { alphabet, states, initial, finals: f, delta: vec![None; states * width] })
    }

    fn column(&self, s: TapeSymbol) -> usize {
        match s {
            TapeSymbol::LeftEnd => 0,
            TapeSymbol::Letter(a) => a + 1,
            TapeSymbol::RightEnd => self.alphabet.len() + 1,
        }
    }

    /// Sets δ(state, symbol) and λ(state, symbol).
    pub fn set_transition(
        &mut self,
        state: usize,
        symbol: TapeSymbol,
        target: usize,
        direction: Move,
        output: impl Into<BigUint>,
    ) -> Result<()> {
        if state >= self.states || target >= self.states {
            return Err(Error::MalformedMachine(format!("transition {state} -> {target} out of range")));
        }
        if let TapeSymbol::Letter(a) = symbol {
            if a >= self.alphabet.len() {
                return Err(Error::UnknownLetter(format!("symbol #{a}")));
            }
        }
        let idx = state * (self.alphabet.len() + 2) + self.column(symbol);
        self.delta[idx] = Some(Transition { target, direction, output: output.into() });
        Ok(())
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn transition(&self, state: usize, symbol: TapeSymbol) -> Option<&Transition> {
        self.delta[state * (self.alphabet.len() + 2) + self.column(symbol)].as_ref()
    }

    /// All defined transitions, in state then column order.
    pub fn transitions(&self) -> Vec<(usize, TapeSymbol, &Transition)> {
        let width = self.alphabet.len() + 2;
        let mut out = Vec::new();
        for (i, t) in self.delta.iter().enumerate() {
            if let Some(t) = t {
                let col = i % width;
                let sym = match col {
                    0 => TapeSymbol::LeftEnd,
                    c if c == width - 1 => TapeSymbol::RightEnd,
                    c => TapeSymbol::Letter(c - 1),
                };
                out.push((i / width, sym, t));
            }
        }
        out
    }

    /// Sum of the outputs along the run on `⊢w⊣`; 0 when the run rejects,
    /// falls off the tape or loops, and 0 on the empty word.
    pub fn eval(&self, w: &[Symbol]) -> BigUint {
        let n = w.len();
        if n == 0 {
            return BigUint::zero();
        }
        let bound = self.states * (n + 2);
        let (mut q, mut pos) = (self.initial, 0usize);
        let mut total = BigUint::zero();
        for _ in 0..=bound {
            if pos == n + 1 && self.finals[q] {
                return total;
            }
            let cell = match pos {
                0 => TapeSymbol::LeftEnd,
                p if p == n + 1 => TapeSymbol::RightEnd,
                p => TapeSymbol::Letter(w[p - 1]),
            };
            let Some(t) = self.transition(q, cell) else {
                return BigUint::zero();
            };
            total += &t.output;
            match t.direction {
                Move::Left if pos == 0 => return BigUint::zero(),
                Move::Left => pos -= 1,
                Move::Right if pos == n + 1 => return BigUint::zero(),
                Move::Right => pos += 1,
            }
            q = t.target;
        }
        BigUint::zero()
    }

    pub fn eval_str(&self, w: &str) -> Result<BigUint> {
        Ok(self.eval(&self.alphabet.parse_word(w)?))
    }

    fn letter_behavior(&self, a: Symbol) -> Behavior {
        // Entering a single cell from either side starts on that cell.
        let half: Vec<Exit> = (0..self.states)
            .map(|s| match self.transition(s, TapeSymbol::Letter(a)) {
                None => Exit::Stuck,
                Some(t) if t.direction == Move::Left => Exit::Left(t.target),
                Some(t) => Exit::Right(t.target),
            })
            .collect();
        Behavior { exits: half.repeat(2), nonempty: true }
    }

    fn empty_behavior(&self) -> Behavior {
        let q = self.states;
        let exits = (0..q).map(Exit::Right).chain((0..q).map(Exit::Left)).collect();
        Behavior { exits, nonempty: false }
    }

    fn compose(&self, u: &Behavior, v: &Behavior) -> Behavior {
        let q = self.states;
        let mut exits = Vec::with_capacity(2 * q);
        for entry in 0..2 * q {
            // (in_v, entry index into that side's behavior)
            let mut cur = if entry < q { (false, entry) } else { (true, entry) };
            let mut result = Exit::Stuck;
            for _ in 0..=2 * q {
                let (in_v, e) = cur;
                let exit = if in_v { v.exits[e] } else { u.exits[e] };
                match (in_v, exit) {
                    (_, Exit::Stuck) => break,
                    (false, Exit::Left(s)) => {
                        result = Exit::Left(s);
                        break;
                    }
                    (false, Exit::Right(s)) => cur = (true, s),
                    (true, Exit::Right(s)) => {
                        result = Exit::Right(s);
                        break;
                    }
                    (true, Exit::Left(s)) => cur = (false, q + s),
                }
            }
            exits.push(result);
        }
        Behavior { exits, nonempty: u.nonempty || v.nonempty }
    }

    /// Output produced on the tape `⊢ [left] a [right] ⊣` at the letter cell,
    /// plus the endmarker cells when the adjacent segment is empty. Zero when
    /// the abstract run does not accept.
    fn local_output(&self, left: &Behavior, a: Symbol, right: &Behavior) -> BigUint {
        let mut pieces = vec![Piece::Cell(TapeSymbol::LeftEnd, !left.nonempty)];
        if left.nonempty {
            pieces.push(Piece::Segment(left));
        }
        pieces.push(Piece::Cell(TapeSymbol::Letter(a), true));
        if right.nonempty {
            pieces.push(Piece::Segment(right));
        }
        pieces.push(Piece::Cell(TapeSymbol::RightEnd, !right.nonempty));
        let last = pieces.len() - 1;
        let q = self.states;

        let mut total = BigUint::zero();
        // (piece, entered from the right, state)
        let mut seen: HashSet<(usize, bool, usize)> = HashSet::new();
        let (mut p, mut from_right, mut s) = (0usize, false, self.initial);
        loop {
            if !seen.insert((p, from_right, s)) {
                return BigUint::zero();
            }
            let (dir, next) = match &pieces[p] {
                Piece::Cell(sym, counted) => {
                    if p == last && self.finals[s] {
                        return total;
                    }
                    let Some(t) = self.transition(s, *sym) else {
                        return BigUint::zero();
                    };
                    if *counted {
                        total += &t.output;
                    }
                    (t.direction, t.target)
                }
                Piece::Segment(b) => match b.exits[if from_right { q + s } else { s }] {
                    Exit::Stuck => return BigUint::zero(),
                    Exit::Left(t) => (Move::Left, t),
                    Exit::Right(t) => (Move::Right, t),
                },
            };
            match dir {
                Move::Left if p == 0 => return BigUint::zero(),
                Move::Left => {
                    p -= 1;
                    from_right = true;
                }
                Move::Right if p == last => return BigUint::zero(),
                Move::Right => {
                    p += 1;
                    from_right = false;
                }
            }
            s = next;
        }
    }

    /// Level-0 bimachine computing the same function. The monoid is the
    /// crossing-behavior monoid of the transducer with the empty word kept
    /// apart, so that λ can detect the first and last positions.
    pub fn to_bimachine(&self) -> Result<NestedBimachine> {
        let gens: Vec<Behavior> = self.alphabet.symbols().map(|a| self.letter_behavior(a)).collect();
        let g = generate(self.empty_behavior(), &gens, |u, v| self.compose(u, v));
        let size = g.monoid.size();
        let morphism = Morphism::new(self.alphabet.clone(), g.monoid.into(), g.generators)?;
        let nsym = self.alphabet.len();
        let mut values = Vec::with_capacity(size * nsym * size);
        for m in 0..size {
            for a in 0..nsym {
                for n in 0..size {
                    values.push(self.local_output(&g.elements[m], a, &g.elements[n]));
                }
            }
        }
        NestedBimachine::with_values(Kind::Marble, morphism, values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Exit {
    Left(usize),
    Right(usize),
    Stuck,
}

/// How a run crosses a factor: for each state, where it leaves when entering
/// from the left (first half) or from the right (second half).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Behavior {
    exits: Vec<Exit>,
    nonempty: bool,
}

enum Piece<'a> {
    /// A single cell; the flag tells whether its outputs are counted.
    Cell(TapeSymbol, bool),
    Segment(&'a Behavior),
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// One left-to-right pass emitting 1 per `a`.
    pub(crate) fn nb_a() -> TwoWayTransducer {
        let ab = Alphabet::from_letters("ab").unwrap();
        let mut t = TwoWayTransducer::new(ab, 1, 0, &[0]).unwrap();
        t.set_transition(0, TapeSymbol::LeftEnd, 0, Move::Right, 0u32).unwrap();
        t.set_transition(0, TapeSymbol::Letter(0), 0, Move::Right, 1u32).unwrap();
        t.set_transition(0, TapeSymbol::Letter(1), 0, Move::Right, 0u32).unwrap();
        t
    }

    /// Sweeps right, left, right, emitting 1 per letter on each sweep.
    pub(crate) fn three_sweep() -> TwoWayTransducer {
        let abc = Alphabet::from_letters("abc").unwrap();
        let mut t = TwoWayTransducer::new(abc, 3, 0, &[2]).unwrap();
        t.set_transition(0, TapeSymbol::LeftEnd, 0, Move::Right, 0u32).unwrap();
        t.set_transition(0, TapeSymbol::RightEnd, 1, Move::Left, 0u32).unwrap();
        t.set_transition(1, TapeSymbol::LeftEnd, 2, Move::Right, 0u32).unwrap();
        for a in 0..3 {
            t.set_transition(0, TapeSymbol::Letter(a), 0, Move::Right, 1u32).unwrap();
            t.set_transition(1, TapeSymbol::Letter(a), 1, Move::Left, 1u32).unwrap();
            t.set_transition(2, TapeSymbol::Letter(a), 2, Move::Right, 1u32).unwrap();
        }
        t
    }

    #[test]
    fn nb_a_counts() {
        let t = nb_a();
        assert_eq!(t.eval_str("aba").unwrap(), BigUint::from(2u32));
        assert_eq!(t.eval_str("").unwrap(), BigUint::zero());
        assert_eq!(t.eval_str("bbb").unwrap(), BigUint::zero());
    }

    #[test]
    fn three_sweeps() {
        let t = three_sweep();
        assert_eq!(t.eval_str("abc").unwrap(), BigUint::from(9u32));
        assert_eq!(t.eval_str("a").unwrap(), BigUint::from(3u32));
    }

    #[test]
    fn empty_word_accepting_run_gives_zero() {
        let mut t = TwoWayTransducer::new(Alphabet::from_letters("a").unwrap(), 2, 0, &[1]).unwrap();
        t.set_transition(0, TapeSymbol::LeftEnd, 1, Move::Right, 0u32).unwrap();
        assert_eq!(t.eval(&[]), BigUint::zero());
    }

    #[test]
    fn loops_and_overruns_give_zero() {
        let a = Alphabet::from_letters("a").unwrap();
        let mut t = TwoWayTransducer::new(a.clone(), 1, 0, &[]).unwrap();
        t.set_transition(0, TapeSymbol::LeftEnd, 0, Move::Right, 1u32).unwrap();
        t.set_transition(0, TapeSymbol::Letter(0), 0, Move::Left, 1u32).unwrap();
        assert_eq!(t.eval_str("aa").unwrap(), BigUint::zero());
        let mut t = TwoWayTransducer::new(a, 1, 0, &[]).unwrap();
        t.set_transition(0, TapeSymbol::LeftEnd, 0, Move::Left, 1u32).unwrap();
        assert_eq!(t.eval_str("a").unwrap(), BigUint::zero());
    }

    fn all_words(n: usize, max: usize) -> Vec<Vec<Symbol>> {
        let mut out = vec![vec![]];
        let mut layer = vec![vec![]];
        for _ in 0..max {
            layer =
                layer.iter().flat_map(|w: &Vec<Symbol>| (0..n).map(move |a| [w.clone(), vec![a]].concat())).collect();
            out.extend(layer.iter().cloned());
        }
        out
    }

    #[test]
    fn bimachine_agrees_exhaustively() {
        for t in [nb_a(), three_sweep()] {
            let b = t.to_bimachine().unwrap();
            for w in all_words(t.alphabet().len(), 6) {
                assert_eq!(b.eval(&w), t.eval(&w), "word {w:?}");
            }
        }
    }

    #[test]
    fn bimachine_of_zero_transducer() {
        let mut t = TwoWayTransducer::new(Alphabet::from_letters("ab").unwrap(), 1, 0, &[0]).unwrap();
        t.set_transition(0, TapeSymbol::LeftEnd, 0, Move::Right, 0u32).unwrap();
        t.set_transition(0, TapeSymbol::Letter(0), 0, Move::Right, 0u32).unwrap();
        t.set_transition(0, TapeSymbol::Letter(1), 0, Move::Right, 0u32).unwrap();
        let b = t.to_bimachine().unwrap();
        for w in all_words(2, 5) {
            assert_eq!(b.eval(&w), BigUint::zero());
        }
    }
}
