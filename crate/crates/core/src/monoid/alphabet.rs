use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// Index of a symbol inside an [`Alphabet`].
pub type Symbol = usize;

/// Combining characters used to render the successive mark levels.
const MARK_CHARS: [char; 4] = ['\u{0304}', '\u{0331}', '\u{0305}', '\u{0332}'];

/// Maximum nesting of marked copies.
pub const MAX_MARKS: u32 = MARK_CHARS.len() as u32;

/// An ordered alphabet, possibly extended by nested marked copies.
///
/// With `n` base letters and `k` mark levels there are `n * 2^k` symbols.
/// Symbol `s` spells base letter `s % n`; bit `j` of `s / n` records a mark
/// at level `j + 1`. Marking at the next level maps `s` to `s + len()`, so the
/// symbols of an alphabet are exactly the unmarked symbols of its marked copy.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    letters: Vec<char>,
    marks: u32,
}

impl Alphabet {
    pub fn new(letters: Vec<char>) -> Result<Self> {
        for (i, c) in letters.iter().enumerate() {
            if letters[..i].contains(c) {
                return Err(Error::AlphabetMismatch(format!("letter {c:?} listed twice")));
            }
            if MARK_CHARS.contains(c) || matches!(c, '(' | ')') {
                return Err(Error::AlphabetMismatch(format!("letter {c:?} is reserved")));
            }
        }
        Ok(Alphabet { letters, marks: 0 })
    }

    /// Builds an alphabet from a string of distinct letters.
    pub fn from_letters(s: &str) -> Result<Self> {
        Self::new(s.chars().collect())
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn marks(&self) -> u32 {
        self.marks
    }

    pub fn len(&self) -> usize {
        self.letters.len() << self.marks
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn symbols(&self) -> Range<Symbol> {
        0..self.len()
    }

    /// The alphabet with every mark level removed.
    pub fn base(&self) -> Alphabet {
        Alphabet { letters: self.letters.clone(), marks: 0 }
    }

    /// `self ⊎ marked copy of self`.
    pub fn marked(&self) -> Result<Alphabet> {
        if self.marks >= MAX_MARKS {
            return Err(Error::Unsupported(format!("more than {MAX_MARKS} nested mark levels")));
        }
        Ok(Alphabet { letters: self.letters.clone(), marks: self.marks + 1 })
    }

    /// The alphabet one mark level down. Panics on a base alphabet.
    pub fn unmarked(&self) -> Alphabet {
        assert!(self.marks > 0, "alphabet carries no mark");
        Alphabet { letters: self.letters.clone(), marks: self.marks - 1 }
    }

    /// Marks `s` at the next level: the result lives in `self.marked()`.
    pub fn mark(&self, s: Symbol) -> Symbol {
        debug_assert!(s < self.len());
        s + self.len()
    }

    /// Removes the outermost mark of a symbol of `self` (which must carry marks).
    pub fn unmark(&self, s: Symbol) -> Symbol {
        debug_assert!(self.marks > 0 && s < self.len());
        s % (self.len() / 2)
    }

    /// Whether `s` carries the outermost mark level of `self`.
    pub fn is_marked(&self, s: Symbol) -> bool {
        self.marks > 0 && s >= self.len() / 2
    }

    /// The base letter spelled by `s`.
    pub fn letter(&self, s: Symbol) -> char {
        self.letters[s % self.letters.len()]
    }

    /// Index of an unmarked base letter.
    pub fn symbol(&self, c: char) -> Option<Symbol> {
        self.letters.iter().position(|&l| l == c)
    }

    pub fn render(&self, s: Symbol) -> String {
        let n = self.letters.len();
        let mut out = String::new();
        out.push(self.letters[s % n]);
        let mask = s / n;
        for (j, m) in MARK_CHARS.iter().enumerate() {
            if mask >> j & 1 == 1 {
                out.push(*m);
            }
        }
        out
    }

    pub fn render_word(&self, w: &[Symbol]) -> String {
        w.iter().map(|&s| self.render(s)).collect()
    }

    /// Parses one rendered symbol, e.g. `"a"` or `"a\u{304}"`.
    pub fn parse_symbol(&self, s: &str) -> Result<Symbol> {
        let w = self.parse_word(s)?;
        if w.len() != 1 {
            return Err(Error::UnknownLetter(s.to_string()));
        }
        Ok(w[0])
    }

    /// Parses a word; each letter may be followed by combining marks.
    pub fn parse_word(&self, s: &str) -> Result<Vec<Symbol>> {
        let n = self.letters.len();
        let mut out: Vec<Symbol> = Vec::new();
        let mut last_mask = 0usize;
        for c in s.chars() {
            if let Some(j) = MARK_CHARS.iter().position(|&m| m == c) {
                let Some(last) = out.last_mut() else {
                    return Err(Error::UnknownLetter(s.to_string()));
                };
                if j as u32 >= self.marks || last_mask >> j & 1 == 1 {
                    return Err(Error::UnknownLetter(s.to_string()));
                }
                last_mask |= 1 << j;
                *last += n << j;
            } else {
                let i = self.symbol(c).ok_or_else(|| Error::UnknownLetter(c.to_string()))?;
                out.push(i);
                last_mask = 0;
            }
        }
        Ok(out)
    }

    /// Checks that every symbol of `w` belongs to the alphabet.
    pub fn check_word(&self, w: &[Symbol]) -> Result<()> {
        match w.iter().find(|&&s| s >= self.len()) {
            Some(s) => Err(Error::UnknownLetter(format!("symbol #{s}"))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for s in self.symbols() {
            if s > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.render(s))?;
        }
        write!(f, "}}")
    }
}

/// The marked word ω(w, i): `w` with its `i`-th symbol (0-based) marked.
pub fn mark_position(alphabet: &Alphabet, w: &[Symbol], i: usize) -> Vec<Symbol> {
    let mut out = w.to_vec();
    out[i] = alphabet.mark(w[i]);
    out
}
