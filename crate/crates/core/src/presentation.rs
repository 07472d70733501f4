//! Finite presentations, power relators and the tower presentations
//! `<a_1..a_m | A_1^n, ..., A_{i-1}^n>`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{parse_letters, free_reduce, Word, WordParseError};

/// Generators `1..=rank` and an ordered list of relators.
///
/// Relators are nonempty and cyclically reduced; order is significant
/// (independence checks refer to relators by position).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Presentation {
    rank: usize,
    relators: Vec<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: generator {index} exceeds rank {rank}")]
    UnknownGenerator { line: usize, index: usize, rank: usize },
    #[error("line {line}: relator reduces to the empty word")]
    EmptyRelator { line: usize },
    #[error("relator {position} is empty after reduction")]
    EmptyRelatorAt { position: usize },
    #[error("relator {position} uses generator {index} but rank is {rank}")]
    RelatorOutOfRange { position: usize, index: usize, rank: usize },
    #[error("power relator of the empty word")]
    EmptyPowerBase,
    #[error("rank must be at least 1")]
    ZeroRank,
}

/// Non-fatal notes produced while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    /// The relator on this line was not freely and cyclically reduced.
    Reduced { line: usize, original: String, stored: Word },
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseWarning::Reduced { line, original, stored } => {
                write!(f, "line {line}: relator {original} stored as {stored}")
            }
        }
    }
}

impl Presentation {
    /// Cyclically reduces every relator; rejects relators that vanish.
    pub fn new(rank: usize, relators: Vec<Word>) -> Result<Self, PresentationError> {
        if rank == 0 {
            return Err(PresentationError::ZeroRank);
        }
        let mut stored = Vec::with_capacity(relators.len());
        for (position, r) in relators.into_iter().enumerate() {
            let core = r.cyclic_reduce().0;
            if core.is_empty() {
                return Err(PresentationError::EmptyRelatorAt { position });
            }
            if core.max_index() > rank {
                return Err(PresentationError::RelatorOutOfRange { position, index: core.max_index(), rank });
            }
            stored.push(core);
        }
        Ok(Presentation { rank, relators: stored })
    }

    pub fn free(rank: usize) -> Self {
        assert!(rank >= 1);
        Presentation { rank, relators: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// Same presentation with relator `index` removed.
    pub fn without_relator(&self, index: usize) -> Presentation {
        let mut relators = self.relators.clone();
        relators.remove(index);
        Presentation { rank: self.rank, relators }
    }

    pub fn with_relator(&self, r: Word) -> Result<Presentation, PresentationError> {
        let mut relators = self.relators.clone();
        relators.push(r);
        Presentation::new(self.rank, relators)
    }

    /// Parses the line format (`gens <m>`, `rel <word>`, `#` comments),
    /// returning the presentation and any reduction warnings.
    pub fn parse_with_warnings(text: &str) -> Result<(Presentation, Vec<ParseWarning>), PresentationError> {
        let mut rank: Option<usize> = None;
        let mut relators = Vec::new();
        let mut warnings = Vec::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw_line.split('#').next().unwrap_or("");
            let trimmed = content.trim_start();
            if trimmed.trim().is_empty() {
                continue;
            }
            let indent = content.len() - trimmed.len();
            let mut parts = trimmed.split_whitespace();
            let keyword = parts.next().unwrap_or("");
            let arg = parts.next();
            if let Some(extra) = parts.next() {
                let column = content.find(extra).unwrap_or(0) + 1;
                return Err(syntax(line, column, "unexpected extra token"));
            }
            let arg_column = arg.map(|a| indent + keyword.len() + trimmed[keyword.len()..].find(a).unwrap_or(0) + 1);
            match keyword {
                "gens" => {
                    if rank.is_some() {
                        return Err(syntax(line, indent + 1, "duplicate gens header"));
                    }
                    let a = arg.ok_or_else(|| syntax(line, indent + 5, "missing generator count"))?;
                    let m: usize = a
                        .parse()
                        .ok()
                        .filter(|&m| m >= 1)
                        .ok_or_else(|| syntax(line, arg_column.unwrap(), "generator count must be a positive integer"))?;
                    rank = Some(m);
                }
                "rel" => {
                    let m = rank.ok_or_else(|| syntax(line, indent + 1, "rel before gens header"))?;
                    let a = arg.ok_or_else(|| syntax(line, indent + 4, "missing relator word"))?;
                    let col0 = arg_column.unwrap();
                    let letters = parse_letters(a).map_err(|e| match e {
                        WordParseError::Empty => syntax(line, col0, "empty word"),
                        other => syntax(line, col0 + other.column() - 1, &other.to_string()),
                    })?;
                    if let Some(g) = letters.iter().find(|g| g.index() > m) {
                        return Err(PresentationError::UnknownGenerator { line, index: g.index(), rank: m });
                    }
                    let reduced = free_reduce(letters.iter().copied());
                    let core = reduced.cyclic_reduce().0;
                    if core.is_empty() {
                        return Err(PresentationError::EmptyRelator { line });
                    }
                    if core.letters() != letters.as_slice() {
                        warnings.push(ParseWarning::Reduced { line, original: a.to_string(), stored: core.clone() });
                    }
                    relators.push(core);
                }
                other => {
                    return Err(syntax(line, indent + 1, &format!("unknown keyword {other:?}")));
                }
            }
        }
        let rank = rank.ok_or_else(|| syntax(1, 1, "missing gens header"))?;
        Ok((Presentation { rank, relators }, warnings))
    }

    /// Canonical text form; `parse` of it gives back the same presentation.
    pub fn to_text(&self) -> String {
        let mut out = format!("gens {}\n", self.rank);
        for r in &self.relators {
            out.push_str(&format!("rel {r}\n"));
        }
        out
    }
}

fn syntax(line: usize, column: usize, message: &str) -> PresentationError {
    PresentationError::Syntax { line, column, message: message.to_string() }
}

pub fn parse_presentation(text: &str) -> Result<Presentation, PresentationError> {
    Presentation::parse_with_warnings(text).map(|(p, _)| p)
}

pub fn format_presentation(p: &Presentation) -> String {
    p.to_text()
}

impl FromStr for Presentation {
    type Err = PresentationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_presentation(s)
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = (1..=self.rank).map(|i| Word::generator(i).to_string()).collect();
        let rels: Vec<String> = self.relators.iter().map(|r| r.to_string()).collect();
        write!(f, "<{} | {}>", gens.join(","), rels.join(", "))
    }
}

impl Serialize for Presentation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for Presentation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_presentation(&s).map_err(serde::de::Error::custom)
    }
}

/// `w^n`, freely reduced.
pub fn power_relator(w: &Word, n: usize) -> Result<Word, PresentationError> {
    if w.is_empty() {
        return Err(PresentationError::EmptyPowerBase);
    }
    Ok(w.pow(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TowerStatus {
    Running,
    TerminatedEqualsBurnside,
    StalledDivergent,
    OracleInconclusive,
}

/// Periods found so far for rank `m` and exponent `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerState {
    pub m: usize,
    pub n: usize,
    pub periods: Vec<Word>,
    pub status: TowerStatus,
}

impl TowerState {
    pub fn new(m: usize, n: usize) -> Self {
        TowerState { m, n, periods: Vec::new(), status: TowerStatus::Running }
    }
}

/// The presentation of `B(i-1)`: relators `A_1^n, ..., A_{i-1}^n` in rank order.
pub fn tower_presentation(st: &TowerState) -> Presentation {
    let relators = st
        .periods
        .iter()
        .map(|a| power_relator(a, st.n).expect("periods are nonempty"))
        .collect();
    Presentation::new(st.m, relators).expect("power relators of periods are valid")
}
