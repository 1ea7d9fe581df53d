//! Words over the alphabet `{x0, x1, ..., xm}`; `x0` is the drift letter.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Letter = u8;

pub const DRIFT: Letter = 0;
pub const INPUT: Letter = 1;

/// A finite sequence of letter indices. Ordered graded-lexicographically:
/// shorter words first, equal lengths compared letter by letter.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(SmallVec<[Letter; 16]>);

impl Word {
    pub fn empty() -> Self {
        Word(SmallVec::new())
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        Word(SmallVec::from_slice(letters))
    }

    pub fn letter(l: Letter) -> Self {
        Word::from_letters(&[l])
    }

    /// `x0^k`.
    pub fn drift_power(k: usize) -> Self {
        Word(std::iter::repeat_n(DRIFT, k).collect())
    }

    /// `x0^k x1`.
    pub fn drift_then_input(k: usize) -> Self {
        let mut w = Word::drift_power(k);
        w.0.push(INPUT);
        w
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    /// Drops the first letter.
    pub fn tail(&self) -> Word {
        Word(SmallVec::from_slice(&self.0[1..]))
    }

    pub fn prepend(&self, l: Letter) -> Word {
        let mut out = SmallVec::with_capacity(self.len() + 1);
        out.push(l);
        out.extend_from_slice(&self.0);
        Word(out)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        out.extend_from_slice(&other.0);
        Word(out)
    }

    /// Number of leading drift letters.
    pub fn leading_drift(&self) -> usize {
        self.0.iter().take_while(|&&l| l == DRIFT).count()
    }

    pub fn is_drift_only(&self) -> bool {
        self.0.iter().all(|&l| l == DRIFT)
    }

    pub fn max_letter(&self) -> Option<Letter> {
        self.0.iter().copied().max()
    }

    /// Checks every letter against an alphabet `x0..=x{max_index}`.
    pub fn check_alphabet(&self, max_index: usize) -> Result<()> {
        match self.max_letter() {
            Some(l) if l as usize > max_index => Err(Error::Alphabet {
                letter: l as usize,
                max: max_index,
            }),
            _ => Ok(()),
        }
    }

    /// Parses `"x0 x1 x1"` or `"0 1 1"`; the empty string is the empty word.
    pub fn parse(text: &str, max_index: usize) -> Result<Word> {
        let mut letters = SmallVec::new();
        for token in text.split_whitespace() {
            let digits = token.strip_prefix('x').unwrap_or(token);
            let index: usize = digits
                .parse()
                .map_err(|_| Error::Parse(format!("malformed letter token {token:?}")))?;
            if index > max_index {
                return Err(Error::Alphabet {
                    letter: index,
                    max: max_index,
                });
            }
            if index > Letter::MAX as usize {
                return Err(Error::Parse(format!("letter index {index} too large")));
            }
            letters.push(index as Letter);
        }
        Ok(Word(letters))
    }

    /// Every word of length `len` over `x0..=x{max_index}`, in lexicographic order.
    pub fn all_of_length(len: usize, max_index: usize) -> Vec<Word> {
        let base = max_index + 1;
        let count = base.pow(len as u32);
        (0..count)
            .map(|mut code| {
                let mut letters = SmallVec::from_elem(0, len);
                for slot in letters.iter_mut().rev() {
                    *slot = (code % base) as Letter;
                    code /= base;
                }
                Word(letters)
            })
            .collect()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "x{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("∅")
        } else {
            write!(f, "{self}")
        }
    }
}

impl From<&[Letter]> for Word {
    fn from(letters: &[Letter]) -> Self {
        Word::from_letters(letters)
    }
}

impl<const N: usize> From<[Letter; N]> for Word {
    fn from(letters: [Letter; N]) -> Self {
        Word::from_letters(&letters)
    }
}
