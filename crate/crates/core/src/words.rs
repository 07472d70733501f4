//! Letters, freely reduced words, and the shortlex order used to pick periods.
//!
//! A letter is stored as a packed code `2 * (index - 1) + inverted`, so the
//! natural order on codes is the symbol ranking `a_1 < a_1^-1 < a_2 < a_2^-1 < ...`.
//! Comparing two words first by length and then code by code is therefore the
//! shortlex order that every period search in this crate relies on.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Identifier of the tie-break rule, recorded in every report.
pub const TIE_BREAK_ID: &str = "shortlex(a1<A1<a2<A2<...)";

/// Largest supported generator index.
pub const MAX_RANK: usize = 1 << 14;

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator(u16);

impl Generator {
    /// `index` is 1-based.
    pub fn new(index: usize, inverted: bool) -> Self {
        assert!((1..=MAX_RANK).contains(&index), "generator index {index} out of range");
        Generator((2 * (index - 1) + inverted as usize) as u16)
    }

    pub fn from_code(code: usize) -> Self {
        assert!(code < 2 * MAX_RANK);
        Generator(code as u16)
    }

    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn index(self) -> usize {
        (self.0 >> 1) as usize + 1
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn inverse(self) -> Self {
        Generator(self.0 ^ 1)
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = self.index();
        if i <= 26 {
            let base = if self.is_inverse() { b'A' } else { b'a' };
            write!(f, "{}", (base + (i - 1) as u8) as char)
        } else if self.is_inverse() {
            write!(f, "X{i}")
        } else {
            write!(f, "x{i}")
        }
    }
}

/// A freely reduced word. Immutable once built.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Generator>);

/// Sort key realizing the shortlex order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WordOrderKey {
    pub length: usize,
    pub tiebreak: Vec<(usize, bool)>,
}

pub fn free_reduce<I: IntoIterator<Item = Generator>>(raw: I) -> Word {
    let mut out: Vec<Generator> = Vec::new();
    for g in raw {
        if out.last() == Some(&g.inverse()) {
            out.pop();
        } else {
            out.push(g);
        }
    }
    Word(out)
}

pub fn shortlex_cmp(x: &Word, y: &Word) -> Ordering {
    x.0.len().cmp(&y.0.len()).then_with(|| x.0.cmp(&y.0))
}

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(index: usize) -> Self {
        Word(vec![Generator::new(index, false)])
    }

    /// Builds a word from letters, freely reducing them.
    pub fn from_letters<I: IntoIterator<Item = Generator>>(raw: I) -> Self {
        free_reduce(raw)
    }

    /// Builds a word from packed codes, freely reducing them.
    pub fn from_codes<I: IntoIterator<Item = usize>>(codes: I) -> Self {
        free_reduce(codes.into_iter().map(Generator::from_code))
    }

    pub fn letters(&self) -> &[Generator] {
        &self.0
    }

    pub fn codes(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|g| g.code())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest generator index used, 0 for the empty word.
    pub fn max_index(&self) -> usize {
        self.0.iter().map(|g| g.index()).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|g| g.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &g in &other.0 {
            if out.last() == Some(&g.inverse()) {
                out.pop();
            } else {
                out.push(g);
            }
        }
        Word(out)
    }

    pub fn pow(&self, n: usize) -> Word {
        let (core, conj) = self.cyclic_reduce();
        let mut letters = Vec::with_capacity(core.len() * n);
        for _ in 0..n {
            letters.extend_from_slice(&core.0);
        }
        conj.concat(&Word(letters)).concat(&conj.inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&f), Some(&l)) => self.0.len() == 1 || f != l.inverse(),
            _ => true,
        }
    }

    /// Returns `(core, conjugator)` with `self = conjugator * core * conjugator^-1`.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let n = self.0.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.0[k] == self.0[n - 1 - k].inverse() {
            k += 1;
        }
        (Word(self.0[k..n - k].to_vec()), Word(self.0[..k].to_vec()))
    }

    /// If `self = root^k` with `k >= 2`, returns `(root, k)` with the shortest root.
    pub fn proper_power_root(&self) -> Option<(Word, usize)> {
        let n = self.0.len();
        (1..n)
            .filter(|d| n.is_multiple_of(*d))
            .find(|&d| self.0.chunks(d).all(|c| c == &self.0[..d]))
            .map(|d| (Word(self.0[..d].to_vec()), n / d))
    }

    /// Exponent sum of each generator `1..=rank`.
    pub fn exponent_sums(&self, rank: usize) -> Vec<i64> {
        let mut sums = vec![0i64; rank];
        for g in &self.0 {
            sums[g.index() - 1] += if g.is_inverse() { -1 } else { 1 };
        }
        sums
    }

    /// Every cyclic permutation of the letters (not reduced further).
    pub fn cyclic_conjugates(&self) -> Vec<Vec<Generator>> {
        let n = self.0.len();
        (0..n)
            .map(|s| self.0[s..].iter().chain(&self.0[..s]).copied().collect())
            .collect()
    }

    pub fn order_key(&self) -> WordOrderKey {
        WordOrderKey {
            length: self.0.len(),
            tiebreak: self.0.iter().map(|g| (g.index(), g.is_inverse())).collect(),
        }
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex_cmp(self, other)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for g in &self.0 {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordParseError {
    #[error("unexpected character {found:?} at column {column}")]
    UnexpectedChar { column: usize, found: char },
    #[error("bad generator number at column {column}")]
    BadNumber { column: usize },
    #[error("empty word (write \"1\" for the identity)")]
    Empty,
}

impl WordParseError {
    pub fn column(&self) -> usize {
        match self {
            WordParseError::UnexpectedChar { column, .. } | WordParseError::BadNumber { column } => *column,
            WordParseError::Empty => 1,
        }
    }
}

/// Parses word syntax without reducing: `a` = a_1, `B` = a_2^-1, `x27` / `X27`
/// for larger indices, `1` for the identity. Columns are 1-based.
pub fn parse_letters(text: &str) -> Result<Vec<Generator>, WordParseError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(WordParseError::Empty);
    }
    if text == "1" {
        return Ok(Vec::new());
    }
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c == 'x' || c == 'X' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if j == start {
                // bare x/X is the 24th generator
                out.push(Generator::new(24, c == 'X'));
                i += 1;
                continue;
            }
            let digits: String = chars[start..j].iter().collect();
            let index: usize = digits.parse().map_err(|_| WordParseError::BadNumber { column })?;
            if index == 0 || index > MAX_RANK {
                return Err(WordParseError::BadNumber { column });
            }
            out.push(Generator::new(index, c == 'X'));
            i = j;
        } else if c.is_ascii_lowercase() {
            out.push(Generator::new((c as u8 - b'a') as usize + 1, false));
            i += 1;
        } else if c.is_ascii_uppercase() {
            out.push(Generator::new((c as u8 - b'A') as usize + 1, true));
            i += 1;
        } else {
            return Err(WordParseError::UnexpectedChar { column, found: c });
        }
    }
    Ok(out)
}

impl FromStr for Word {
    type Err = WordParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_letters(s).map(free_reduce)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shortlex enumeration of the nonempty reduced words over `rank` generators.
#[derive(Clone, Debug)]
pub struct ReducedWords {
    rank: usize,
    current: Vec<usize>,
}

pub fn enumerate_reduced(rank: usize, start: Option<&Word>) -> ReducedWords {
    assert!(rank >= 1, "rank must be positive");
    match start {
        Some(w) if !w.is_empty() => ReducedWords {
            rank,
            current: w.codes().collect(),
        },
        _ => ReducedWords {
            rank,
            current: Vec::new(),
        },
    }
}

impl ReducedWords {
    fn smallest_after(&self, prev: Option<usize>) -> usize {
        match prev {
            Some(1) => 1,
            _ => 0,
        }
    }

    fn advance(&mut self) {
        let ncodes = 2 * self.rank;
        let len = self.current.len();
        for pos in (0..len).rev() {
            let prev = if pos == 0 { None } else { Some(self.current[pos - 1]) };
            let mut next = self.current[pos] + 1;
            if prev.is_some_and(|p| next == p ^ 1) {
                next += 1;
            }
            if next < ncodes {
                self.current[pos] = next;
                for q in pos + 1..len {
                    self.current[q] = self.smallest_after(Some(self.current[q - 1]));
                }
                return;
            }
        }
        // all words of this length are exhausted: a^(len+1) is next
        self.current = vec![0; len + 1];
    }
}

impl Iterator for ReducedWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        self.advance();
        Some(Word(self.current.iter().map(|&c| Generator::from_code(c)).collect()))
    }
}
