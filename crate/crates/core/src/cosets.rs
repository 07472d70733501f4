//! Todd–Coxeter coset enumeration (Felsch strategy) and exact computations in
//! the finite groups it realizes.
//!
//! Every table entry that gets defined is pushed as a deduction and all
//! cyclic conjugates of relators through it are scanned before the next
//! definition. Coincidences are resolved with a union-find over coset numbers
//! (smaller number survives). A closed table is renumbered breadth-first from
//! the subgroup coset, so the result does not depend on the order in which
//! cosets happened to be defined.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentation::Presentation;
use crate::words::{Generator, Word};

const NONE: u32 = u32::MAX;

pub const DEFAULT_MAX_COSETS: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CosetStatus {
    Closed { index: usize },
    /// The budget ran out. Says nothing about the index.
    Exhausted { max_cosets: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationStats {
    pub cosets_defined: u64,
    pub max_live: usize,
    pub coincidences: u64,
}

/// A coset table over the `2m` symbols `a, A, b, B, ...`.
///
/// Exhausted tables keep no rows; only closed tables carry data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetTable {
    rank: usize,
    subgroup: Vec<Word>,
    rows: Vec<u32>,
    status: CosetStatus,
    stats: EnumerationStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CosetError {
    #[error("coset table is not closed")]
    NotClosed,
    #[error("table must be enumerated over the trivial subgroup")]
    NontrivialSubgroup,
    #[error("generator images are not permutations of a common degree")]
    BadAction,
    #[error("relator {0} does not act trivially")]
    RelatorNotSatisfied(Word),
}

impl CosetTable {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Subgroup generators the table was enumerated over (empty for actions).
    pub fn subgroup(&self) -> &[Word] {
        &self.subgroup
    }

    pub fn status(&self) -> CosetStatus {
        self.status
    }

    pub fn stats(&self) -> EnumerationStats {
        self.stats
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.status, CosetStatus::Closed { .. })
    }

    pub fn index(&self) -> Option<usize> {
        match self.status {
            CosetStatus::Closed { index } => Some(index),
            CosetStatus::Exhausted { .. } => None,
        }
    }

    fn ncols(&self) -> usize {
        2 * self.rank
    }

    /// Image of `coset` under the symbol with code `code`. Closed tables only.
    #[inline]
    pub fn act(&self, coset: usize, code: usize) -> usize {
        self.rows[coset * self.ncols() + code] as usize
    }

    pub fn trace(&self, coset: usize, w: &Word) -> usize {
        w.codes().fold(coset, |c, x| self.act(c, x))
    }

    pub fn trace_letters(&self, coset: usize, w: &[Generator]) -> usize {
        w.iter().fold(coset, |c, g| self.act(c, g.code()))
    }

    /// Permutation of each positive generator, `perm[c] = c * a_i`.
    pub fn generator_perms(&self) -> Vec<Vec<u32>> {
        let n = self.index().unwrap_or(0);
        (0..self.rank)
            .map(|g| (0..n).map(|c| self.rows[c * self.ncols() + 2 * g]).collect())
            .collect()
    }

    /// Closed table from a transitive permutation action with base point 0.
    pub fn from_action(rank: usize, perms: &[Vec<u32>]) -> Result<CosetTable, CosetError> {
        if perms.len() != rank || rank == 0 {
            return Err(CosetError::BadAction);
        }
        let n = perms[0].len();
        let ncols = 2 * rank;
        let mut rows = vec![NONE; n * ncols];
        for (g, perm) in perms.iter().enumerate() {
            if perm.len() != n {
                return Err(CosetError::BadAction);
            }
            for (c, &d) in perm.iter().enumerate() {
                let d = d as usize;
                if d >= n || rows[d * ncols + 2 * g + 1] != NONE {
                    return Err(CosetError::BadAction);
                }
                rows[c * ncols + 2 * g] = d as u32;
                rows[d * ncols + 2 * g + 1] = c as u32;
            }
        }
        let (rows, index) = standardize(&rows, ncols, n, 0);
        if index != n {
            return Err(CosetError::BadAction);
        }
        Ok(CosetTable {
            rank,
            subgroup: Vec::new(),
            rows,
            status: CosetStatus::Closed { index },
            stats: EnumerationStats::default(),
        })
    }

    /// Does every relator fix every coset?
    pub fn satisfies(&self, p: &Presentation) -> Result<(), CosetError> {
        let n = self.index().ok_or(CosetError::NotClosed)?;
        for r in p.relators() {
            if (0..n).any(|c| self.trace(c, r) != c) {
                return Err(CosetError::RelatorNotSatisfied(r.clone()));
            }
        }
        Ok(())
    }

    /// One row per coset, one column per symbol.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("coset");
        for code in 0..self.ncols() {
            write!(out, ",{}", Generator::from_code(code)).unwrap();
        }
        out.push('\n');
        for c in 0..self.index().unwrap_or(0) {
            write!(out, "{c}").unwrap();
            for code in 0..self.ncols() {
                write!(out, ",{}", self.act(c, code)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Breadth-first renumbering from `start`; returns the compact rows and count.
fn standardize(rows: &[u32], ncols: usize, nrows: usize, start: usize) -> (Vec<u32>, usize) {
    let mut new_id = vec![NONE; nrows];
    let mut order = Vec::new();
    new_id[start] = 0;
    order.push(start);
    let mut head = 0;
    while head < order.len() {
        let c = order[head];
        head += 1;
        for x in 0..ncols {
            let d = rows[c * ncols + x];
            if d != NONE && new_id[d as usize] == NONE {
                new_id[d as usize] = order.len() as u32;
                order.push(d as usize);
            }
        }
    }
    let mut out = vec![NONE; order.len() * ncols];
    for (i, &c) in order.iter().enumerate() {
        for x in 0..ncols {
            let d = rows[c * ncols + x];
            out[i * ncols + x] = if d == NONE { NONE } else { new_id[d as usize] };
        }
    }
    (out, order.len())
}

struct Exhausted;

struct Felsch {
    ncols: usize,
    table: Vec<u32>,
    parent: Vec<u32>,
    alloc: usize,
    live: usize,
    max_live: usize,
    slot_limit: usize,
    rels_by_first: Vec<Vec<Vec<u16>>>,
    relators: Vec<Vec<u16>>,
    subgroup: Vec<Vec<u16>>,
    deductions: Vec<(u32, u16)>,
    queue: Vec<u32>,
    stats: EnumerationStats,
}

impl Felsch {
    fn new(p: &Presentation, subgroup: &[Word], max_cosets: usize) -> Self {
        let ncols = 2 * p.rank();
        let mut rels_by_first: Vec<Vec<Vec<u16>>> = vec![Vec::new(); ncols];
        let mut relators = Vec::new();
        for r in p.relators() {
            relators.push(r.codes().map(|c| c as u16).collect());
            for w in [r.clone(), r.inverse()] {
                for conj in w.cyclic_conjugates() {
                    let codes: Vec<u16> = conj.iter().map(|g| g.code() as u16).collect();
                    let bucket = &mut rels_by_first[codes[0] as usize];
                    if !bucket.contains(&codes) {
                        bucket.push(codes);
                    }
                }
            }
        }
        let max_cosets = max_cosets.max(1);
        let mut f = Felsch {
            ncols,
            table: Vec::new(),
            parent: Vec::new(),
            alloc: 0,
            live: 0,
            max_live: max_cosets,
            slot_limit: max_cosets + max_cosets / 4 + 64,
            rels_by_first,
            relators,
            subgroup: subgroup.iter().filter(|w| !w.is_empty()).map(|w| w.codes().map(|c| c as u16).collect()).collect(),
            deductions: Vec::new(),
            queue: Vec::new(),
            stats: EnumerationStats::default(),
        };
        f.new_row();
        f
    }

    fn new_row(&mut self) -> usize {
        let c = self.alloc;
        self.alloc += 1;
        self.live += 1;
        self.table.extend(std::iter::repeat_n(NONE, self.ncols));
        self.parent.push(c as u32);
        self.stats.cosets_defined += 1;
        self.stats.max_live = self.stats.max_live.max(self.live);
        c
    }

    #[inline]
    fn get(&self, c: usize, x: usize) -> u32 {
        self.table[c * self.ncols + x]
    }

    #[inline]
    fn set(&mut self, c: usize, x: usize, d: u32) {
        self.table[c * self.ncols + x] = d;
    }

    #[inline]
    fn is_live(&self, c: usize) -> bool {
        self.parent[c] as usize == c
    }

    fn rep(&mut self, c: usize) -> usize {
        let mut r = c;
        while self.parent[r] as usize != r {
            r = self.parent[r] as usize;
        }
        let mut x = c;
        while self.parent[x] as usize != r {
            let next = self.parent[x] as usize;
            self.parent[x] = r as u32;
            x = next;
        }
        r
    }

    /// Defines `c * x` as a new coset. `c` must be live; returns its (possibly
    /// renumbered) index.
    fn define(&mut self, c: usize, x: usize) -> Result<usize, Exhausted> {
        let mut c = c;
        if self.live >= self.max_live {
            return Err(Exhausted);
        }
        if self.alloc >= self.slot_limit {
            if !self.deductions.is_empty() || !self.queue.is_empty() {
                return Err(Exhausted);
            }
            c = self.compact(c);
        }
        let d = self.new_row();
        self.set(c, x, d as u32);
        self.set(d, x ^ 1, c as u32);
        self.deductions.push((c as u32, x as u16));
        Ok(c)
    }

    /// Drops dead rows, preserving the relative order of live ones.
    fn compact(&mut self, cursor: usize) -> usize {
        let mut new_id = vec![NONE; self.alloc];
        let mut n = 0u32;
        for c in 0..self.alloc {
            if self.is_live(c) {
                new_id[c] = n;
                n += 1;
            }
        }
        let ncols = self.ncols;
        let mut table = Vec::with_capacity(n as usize * ncols);
        for c in 0..self.alloc {
            if self.is_live(c) {
                for x in 0..ncols {
                    let d = self.table[c * ncols + x];
                    table.push(if d == NONE { NONE } else { new_id[d as usize] });
                }
            }
        }
        self.table = table;
        self.alloc = n as usize;
        self.parent = (0..n).collect();
        new_id[cursor] as usize
    }

    fn merge(&mut self, k: usize, l: usize) {
        let k = self.rep(k);
        let l = self.rep(l);
        if k == l {
            return;
        }
        let (keep, drop) = if k < l { (k, l) } else { (l, k) };
        self.parent[drop] = keep as u32;
        self.live -= 1;
        self.queue.push(drop as u32);
    }

    fn coincidence(&mut self, a: usize, b: usize) {
        self.stats.coincidences += 1;
        self.merge(a, b);
        let mut i = 0;
        while i < self.queue.len() {
            let g = self.queue[i] as usize;
            i += 1;
            for x in 0..self.ncols {
                let d = self.get(g, x);
                if d == NONE {
                    continue;
                }
                let d = d as usize;
                self.set(d, x ^ 1, NONE);
                let mu = self.rep(g);
                let nu = self.rep(d);
                let mux = self.get(mu, x);
                if mux != NONE {
                    self.merge(nu, mux as usize);
                } else {
                    let nuxi = self.get(nu, x ^ 1);
                    if nuxi != NONE {
                        self.merge(mu, nuxi as usize);
                    } else {
                        self.set(mu, x, nu as u32);
                        self.set(nu, x ^ 1, mu as u32);
                        self.deductions.push((mu as u32, x as u16));
                    }
                }
            }
        }
        self.queue.clear();
    }

    /// Scans `w` from `a` without defining cosets; records a deduction or a
    /// coincidence when the scan completes or leaves a single gap.
    fn scan(&mut self, a: usize, w: &[u16]) {
        let mut f = a;
        let mut i = 0;
        let mut j = w.len();
        while i < j {
            let n = self.get(f, w[i] as usize);
            if n == NONE {
                break;
            }
            f = n as usize;
            i += 1;
        }
        if i == j {
            if f != a {
                self.coincidence(f, a);
            }
            return;
        }
        let mut b = a;
        while j > i {
            let n = self.get(b, (w[j - 1] ^ 1) as usize);
            if n == NONE {
                break;
            }
            b = n as usize;
            j -= 1;
        }
        if j == i {
            self.coincidence(f, b);
        } else if j == i + 1 {
            let x = w[i] as usize;
            self.set(f, x, b as u32);
            self.set(b, x ^ 1, f as u32);
            self.deductions.push((f as u32, x as u16));
        }
    }

    /// Scans `w` from `a`, defining new cosets to fill gaps.
    fn scan_and_fill(&mut self, a: usize, w: &[u16]) -> Result<(), Exhausted> {
        let mut f = a;
        let mut b = a;
        let mut i = 0;
        let mut j = w.len();
        loop {
            while i < j {
                let n = self.get(f, w[i] as usize);
                if n == NONE {
                    break;
                }
                f = n as usize;
                i += 1;
            }
            if i == j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j > i {
                let n = self.get(b, (w[j - 1] ^ 1) as usize);
                if n == NONE {
                    break;
                }
                b = n as usize;
                j -= 1;
            }
            if j == i {
                self.coincidence(f, b);
                return Ok(());
            }
            if j == i + 1 {
                let x = w[i] as usize;
                self.set(f, x, b as u32);
                self.set(b, x ^ 1, f as u32);
                self.deductions.push((f as u32, x as u16));
                return Ok(());
            }
            if self.live >= self.max_live {
                return Err(Exhausted);
            }
            if self.alloc >= self.slot_limit {
                return Err(Exhausted);
            }
            let d = self.new_row();
            let x = w[i] as usize;
            self.set(f, x, d as u32);
            self.set(d, x ^ 1, f as u32);
            self.deductions.push((f as u32, x as u16));
        }
    }

    fn process_deductions(&mut self) {
        while let Some((a, x)) = self.deductions.pop() {
            let (a, x) = (a as usize, x as usize);
            if !self.is_live(a) {
                continue;
            }
            for k in 0..self.rels_by_first[x].len() {
                if !self.is_live(a) {
                    break;
                }
                let w = std::mem::take(&mut self.rels_by_first[x][k]);
                self.scan(a, &w);
                self.rels_by_first[x][k] = w;
            }
            if self.is_live(a) {
                let b = self.get(a, x);
                if b != NONE && self.is_live(b as usize) {
                    let b = b as usize;
                    for k in 0..self.rels_by_first[x ^ 1].len() {
                        if !self.is_live(b) {
                            break;
                        }
                        let w = std::mem::take(&mut self.rels_by_first[x ^ 1][k]);
                        self.scan(b, &w);
                        self.rels_by_first[x ^ 1][k] = w;
                    }
                }
            }
            for k in 0..self.subgroup.len() {
                let w = std::mem::take(&mut self.subgroup[k]);
                self.scan(0, &w);
                self.subgroup[k] = w;
            }
        }
        #[cfg(debug_assertions)]
        if self.alloc <= 4096 {
            self.check_partial_bijection();
        }
    }

    #[cfg(debug_assertions)]
    fn check_partial_bijection(&self) {
        for c in (0..self.alloc).filter(|&c| self.is_live(c)) {
            for x in 0..self.ncols {
                let d = self.get(c, x);
                if d != NONE {
                    assert!(self.is_live(d as usize), "live coset {c} points at dead {d}");
                    assert_eq!(self.get(d as usize, x ^ 1), c as u32, "table is not a partial bijection");
                }
            }
        }
    }

    /// Scans every relator from every live coset until nothing changes.
    fn verify_closed(&mut self) {
        loop {
            let before = self.stats.coincidences;
            for c in 0..self.alloc {
                for k in 0..self.relators.len() {
                    if !self.is_live(c) {
                        break;
                    }
                    let w = std::mem::take(&mut self.relators[k]);
                    self.scan(c, &w);
                    self.relators[k] = w;
                }
            }
            for k in 0..self.subgroup.len() {
                let w = std::mem::take(&mut self.subgroup[k]);
                self.scan(0, &w);
                self.subgroup[k] = w;
            }
            self.process_deductions();
            if self.stats.coincidences == before {
                break;
            }
        }
    }

    fn run(&mut self) -> Result<(), Exhausted> {
        for k in 0..self.subgroup.len() {
            let w = self.subgroup[k].clone();
            self.scan_and_fill(0, &w)?;
            self.process_deductions();
        }
        let mut c = 0;
        while c < self.alloc {
            if self.is_live(c) {
                for x in 0..self.ncols {
                    if !self.is_live(c) {
                        break;
                    }
                    if self.get(c, x) == NONE {
                        c = self.define(c, x)?;
                        self.process_deductions();
                    }
                }
            }
            c += 1;
        }
        self.verify_closed();
        Ok(())
    }
}

fn nontrivial(ws: &[Word]) -> Vec<Word> {
    ws.iter().filter(|w| !w.is_empty()).cloned().collect()
}

/// Enumerates the cosets of `<subgroup>` in the group presented by `p`.
pub fn enumerate_cosets(p: &Presentation, subgroup: &[Word], max_cosets: usize) -> CosetTable {
    let mut f = Felsch::new(p, subgroup, max_cosets);
    match f.run() {
        Ok(()) => {
            let (rows, index) = standardize(&f.table, f.ncols, f.alloc, 0);
            debug_assert!(rows.iter().all(|&d| d != NONE));
            CosetTable { rank: p.rank(), subgroup: nontrivial(subgroup), rows, status: CosetStatus::Closed { index }, stats: f.stats }
        }
        Err(Exhausted) => CosetTable {
            rank: p.rank(),
            subgroup: nontrivial(subgroup),
            rows: Vec::new(),
            status: CosetStatus::Exhausted { max_cosets },
            stats: f.stats,
        },
    }
}

/// A finite group given by its right regular action, with a shortlex-minimal
/// word for each element. Element 0 is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteRealization {
    table: CosetTable,
    reps: Vec<Word>,
}

/// Breadth-first shortlex-minimal representatives of every coset.
pub fn transversal(t: &CosetTable) -> Vec<Word> {
    let n = t.index().expect("closed table");
    let mut reps: Vec<Option<Word>> = vec![None; n];
    reps[0] = Some(Word::identity());
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        let base = reps[c].clone().unwrap();
        for x in 0..2 * t.rank() {
            let d = t.act(c, x);
            if reps[d].is_none() {
                reps[d] = Some(base.concat(&Word::from_codes([x])));
                queue.push_back(d);
            }
        }
    }
    reps.into_iter().map(|r| r.expect("closed tables are connected")).collect()
}

/// Regular permutation representation from a closed table over the trivial
/// subgroup of `p`.
pub fn realize(p: &Presentation, t: &CosetTable) -> Result<FiniteRealization, CosetError> {
    if !t.is_closed() {
        return Err(CosetError::NotClosed);
    }
    if !t.subgroup.is_empty() {
        return Err(CosetError::NontrivialSubgroup);
    }
    t.satisfies(p)?;
    Ok(FiniteRealization { table: t.clone(), reps: transversal(t) })
}

impl FiniteRealization {
    /// From the right regular action of a group on itself (base point 0).
    pub fn from_regular_action(p: &Presentation, perms: &[Vec<u32>]) -> Result<FiniteRealization, CosetError> {
        let t = CosetTable::from_action(p.rank(), perms)?;
        let r = realize(p, &t)?;
        // regular iff every Schreier generator fixes every point
        let n = r.order();
        for c in 0..n {
            for x in (0..2 * r.rank()).step_by(2) {
                let s = r.reps[c].concat(&Word::from_codes([x])).concat(&r.reps[t.act(c, x)].inverse());
                if (0..n).any(|d| t.trace(d, &s) != d) {
                    return Err(CosetError::BadAction);
                }
            }
        }
        Ok(r)
    }

    pub fn order(&self) -> usize {
        self.reps.len()
    }

    pub fn rank(&self) -> usize {
        self.table.rank()
    }

    pub fn table(&self) -> &CosetTable {
        &self.table
    }

    pub fn rep(&self, g: usize) -> &Word {
        &self.reps[g]
    }

    pub fn reps(&self) -> &[Word] {
        &self.reps
    }

    pub fn element(&self, w: &Word) -> usize {
        self.table.trace(0, w)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table.trace(a, &self.reps[b])
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.table.trace(0, &self.reps[a].inverse())
    }

    pub fn element_order_of(&self, a: usize) -> u64 {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Does every relator of `p` act trivially? (i.e. is this a quotient of `p`)
    pub fn is_quotient_of(&self, p: &Presentation) -> bool {
        p.rank() == self.rank() && self.table.satisfies(p).is_ok()
    }
}

pub fn element_order_finite(r: &FiniteRealization, w: &Word) -> u64 {
    r.element_order_of(r.element(w))
}

/// Searches for `g` with `g u g^-1 = v`; returns the shortlex-least such `g`.
pub fn conjugacy_decide(r: &FiniteRealization, u: &Word, v: &Word) -> Option<Word> {
    let (eu, ev) = (r.element(u), r.element(v));
    (0..r.order())
        .find(|&g| r.mul(r.mul(g, eu), r.inverse(g)) == ev)
        .map(|g| r.rep(g).clone())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterReport {
    pub order: usize,
    pub representatives: Vec<Word>,
}

pub fn center(r: &FiniteRealization) -> CenterReport {
    let gens: Vec<usize> = (0..r.rank()).map(|i| r.element(&Word::generator(i + 1))).collect();
    let representatives: Vec<Word> = (0..r.order())
        .filter(|&g| gens.iter().all(|&x| r.mul(g, x) == r.mul(x, g)))
        .map(|g| r.rep(g).clone())
        .collect();
    CenterReport { order: representatives.len(), representatives }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presentation::parse_presentation;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn pres(s: &str) -> Presentation {
        parse_presentation(s).unwrap()
    }

    const KLEIN: &str = "gens 2\nrel aa\nrel bb\nrel abab\n";
    const C5: &str = "gens 1\nrel aaaaa\n";
    const B23: &str = "gens 2\nrel aaa\nrel bbb\nrel ababab\nrel aBaBaB\n";

    fn realized(text: &str) -> FiniteRealization {
        let p = pres(text);
        let t = enumerate_cosets(&p, &[], DEFAULT_MAX_COSETS);
        realize(&p, &t).unwrap()
    }

    // Independent order-27 model: the Heisenberg group mod 3 with
    // a = (1,0,0), b = (0,1,0) and (x,y,z)(x',y',z') = (x+x', y+y', z+z'+xy').
    fn heisenberg_mul(p: (u8, u8, u8), q: (u8, u8, u8)) -> (u8, u8, u8) {
        ((p.0 + q.0) % 3, (p.1 + q.1) % 3, (p.2 + q.2 + p.0 * q.1) % 3)
    }

    fn heisenberg_eval(word: &Word) -> (u8, u8, u8) {
        let a = (1, 0, 0);
        let b = (0, 1, 0);
        let ai = (2, 0, 0);
        let bi = (0, 2, 0);
        word.letters().iter().fold((0, 0, 0), |acc, g| {
            let x = match (g.index(), g.is_inverse()) {
                (1, false) => a,
                (1, true) => ai,
                (2, false) => b,
                _ => bi,
            };
            heisenberg_mul(acc, x)
        })
    }

    #[test]
    fn heisenberg_model_satisfies_b23_and_has_order_27() {
        let p = pres(B23);
        for r in p.relators() {
            assert_eq!(heisenberg_eval(r), (0, 0, 0));
        }
        // a and b generate all 27 triples
        let mut seen = std::collections::HashSet::new();
        for x in crate::words::enumerate_reduced(2, None).take_while(|w| w.len() <= 6) {
            seen.insert(heisenberg_eval(&x));
        }
        assert_eq!(seen.len(), 27);
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate_cosets(&pres(C5), &[], 1000).index(), Some(5));
        assert_eq!(enumerate_cosets(&pres(KLEIN), &[], 1000).index(), Some(4));
        assert_eq!(enumerate_cosets(&pres(B23), &[], 1000).index(), Some(27));
    }

    #[test]
    fn b23_table_matches_heisenberg_model() {
        let r = realized(B23);
        // element equality in the table agrees with the independent model
        let words: Vec<Word> = crate::words::enumerate_reduced(2, None).take_while(|w| w.len() <= 5).collect();
        for x in &words {
            for y in words.iter().take(60) {
                assert_eq!(r.element(x) == r.element(y), heisenberg_eval(x) == heisenberg_eval(y), "{x} {y}");
            }
        }
    }

    #[test]
    fn subgroup_index() {
        let t = enumerate_cosets(&pres(KLEIN), &[w("a")], 1000);
        assert_eq!(t.index(), Some(2));
        let t = enumerate_cosets(&Presentation::free(2), &[w("aa"), w("ab"), w("aB")], 1000);
        assert_eq!(t.index(), Some(2));
        let t = enumerate_cosets(&pres("gens 2\nrel aa\nrel bb\n"), &[w("ab")], 1000);
        assert_eq!(t.index(), Some(2));
    }

    #[test]
    fn infinite_group_exhausts() {
        let t = enumerate_cosets(&pres("gens 2\nrel aa\nrel bb\n"), &[], 5000);
        assert_eq!(t.status(), CosetStatus::Exhausted { max_cosets: 5000 });
        let t = enumerate_cosets(&Presentation::free(2), &[], 100);
        assert!(!t.is_closed());
    }

    #[test]
    fn closed_tables_are_valid() {
        for text in [KLEIN, C5, B23, "gens 2\nrel aaaa\nrel bb\nrel abab\n", "gens 2\nrel aaaa\nrel aaBB\nrel Baba\n"] {
            let p = pres(text);
            let t = enumerate_cosets(&p, &[], 10_000);
            let n = t.index().unwrap();
            for c in 0..n {
                for x in 0..2 * p.rank() {
                    assert_eq!(t.act(t.act(c, x), x ^ 1), c);
                }
            }
            t.satisfies(&p).unwrap();
        }
    }

    #[test]
    fn deterministic_tables() {
        let p = pres(B23);
        let a = enumerate_cosets(&p, &[], 1000);
        let b = enumerate_cosets(&p, &[], 1000);
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn compaction_keeps_result() {
        // a small budget forces compaction of dead rows on the way
        let p = pres("gens 2\nrel aaaa\nrel bbbb\nrel abab\nrel aBaB\n");
        let big = enumerate_cosets(&p, &[], 100_000);
        let small = enumerate_cosets(&p, &[], big.index().unwrap() + big.stats().coincidences as usize);
        if small.is_closed() {
            assert_eq!(small.rows, big.rows);
        }
    }

    #[test]
    fn realize_examples() {
        let k4 = realized(KLEIN);
        assert_eq!(k4.order(), 4);
        for perm in k4.table().generator_perms() {
            let fixed = perm.iter().enumerate().filter(|(i, &p)| *i == p as usize).count();
            let involution = perm.iter().enumerate().all(|(i, &p)| perm[p as usize] as usize == i);
            assert!(involution && fixed == 0, "double transposition expected");
        }
        let c5 = realized(C5);
        assert_eq!(c5.order(), 5);
        assert_eq!(element_order_finite(&c5, &w("a")), 5);
        let b23 = realized(B23);
        assert_eq!(b23.order(), 27);
        assert_eq!(element_order_finite(&b23, &w("a")), 3);
    }

    #[test]
    fn realize_rejects_open_or_nontrivial() {
        let p = pres("gens 2\nrel aa\nrel bb\n");
        let t = enumerate_cosets(&p, &[], 100);
        assert_eq!(realize(&p, &t), Err(CosetError::NotClosed));
        let k = pres(KLEIN);
        let t = enumerate_cosets(&k, &[w("a")], 100);
        assert_eq!(realize(&k, &t), Err(CosetError::NontrivialSubgroup));
    }

    #[test]
    fn element_orders() {
        let k4 = realized(KLEIN);
        assert_eq!(element_order_finite(&k4, &w("ab")), 2);
        assert_eq!(element_order_finite(&k4, &Word::identity()), 1);
        let b23 = realized(B23);
        assert_eq!(element_order_finite(&b23, &w("aB")), 3);
        // every non-identity element of the model has order 3, so every word does
        for g in 1..27 {
            assert_eq!(b23.element_order_of(g), 3);
        }
    }

    #[test]
    fn conjugacy_examples() {
        let k4 = realized(KLEIN);
        assert_eq!(conjugacy_decide(&k4, &w("a"), &w("b")), None);
        assert_eq!(conjugacy_decide(&k4, &w("a"), &w("a")), Some(Word::identity()));
        let b23 = realized(B23);
        let g = conjugacy_decide(&b23, &w("ab"), &w("ba")).unwrap();
        assert_eq!(b23.element(&g.concat(&w("ab")).concat(&g.inverse())), b23.element(&w("ba")));
        assert_eq!(g, w("A"));
    }

    #[test]
    fn center_examples() {
        assert_eq!(center(&realized(KLEIN)).order, 4);
        assert_eq!(center(&realized(C5)).order, 5);
        let b23 = realized(B23);
        let z = center(&b23);
        assert_eq!(z.order, 3);
        // brute force over the independent model: center is {(0,0,z)}
        for rep in &z.representatives {
            let (x, y, _) = heisenberg_eval(rep);
            assert_eq!((x, y), (0, 0));
        }
        assert!(z.representatives.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn csv_export() {
        let t = enumerate_cosets(&pres(KLEIN), &[], 100);
        let csv = t.to_csv();
        assert!(csv.starts_with("coset,a,A,b,B\n0,"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn from_action_checks() {
        let p = pres(C5);
        let r = FiniteRealization::from_regular_action(&p, &[vec![1, 2, 3, 4, 0]]).unwrap();
        assert_eq!(r.order(), 5);
        assert_eq!(CosetTable::from_action(1, &[vec![1, 1, 0]]), Err(CosetError::BadAction));
        assert!(matches!(
            FiniteRealization::from_regular_action(&p, &[vec![1, 2, 0]]),
            Err(CosetError::RelatorNotSatisfied(_))
        ));
        // S3 acting on three points is transitive but not regular
        let s3 = pres("gens 2\nrel aaa\nrel bb\nrel abab\n");
        assert_eq!(FiniteRealization::from_regular_action(&s3, &[vec![1, 2, 0], vec![0, 2, 1]]), Err(CosetError::BadAction));
    }
}
