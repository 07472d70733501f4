//! String rewriting for group presentations under the shortlex order, with
//! Knuth–Bendix completion.
//!
//! Inverse letters are ordinary symbols; the free cancellation rules `xX -> 1`
//! are seeded like any other rule. Rules are kept in a trie over reversed
//! left-hand sides so that reduction, which pushes letters onto a stack, only
//! has to look at suffixes ending in the letter just pushed.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presentation::Presentation;
use crate::words::{Generator, Word};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub lhs: Vec<Generator>,
    pub rhs: Vec<Generator>,
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", letters_to_string(&self.lhs), letters_to_string(&self.rhs))
    }
}

fn letters_to_string(v: &[Generator]) -> String {
    if v.is_empty() {
        "1".to_string()
    } else {
        v.iter().map(|g| g.to_string()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbBudget {
    pub max_rules: usize,
    pub max_len: usize,
    pub max_steps: u64,
}

impl Default for KbBudget {
    fn default() -> Self {
        KbBudget { max_rules: 20_000, max_len: 64, max_steps: 1_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KbOutcome {
    NotRun,
    Completed,
    RuleBudget,
    LengthBudget,
    StepBudget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbStats {
    pub rules_generated: usize,
    pub max_rule_len: usize,
    pub steps: u64,
    pub outcome: KbOutcome,
}

#[derive(Clone, Debug)]
struct TrieNode {
    next: Box<[u32]>,
    rule: u32,
}

/// Rule storage shared by reduction and completion.
#[derive(Clone, Debug)]
struct RuleSet {
    ncodes: usize,
    lhs: Vec<Vec<u16>>,
    rhs: Vec<Vec<u16>>,
    alive: Vec<bool>,
    trie: Vec<TrieNode>,
    alive_count: usize,
}

impl RuleSet {
    fn new(ncodes: usize) -> Self {
        RuleSet {
            ncodes,
            lhs: Vec::new(),
            rhs: Vec::new(),
            alive: Vec::new(),
            trie: vec![TrieNode { next: vec![NONE; ncodes].into_boxed_slice(), rule: NONE }],
            alive_count: 0,
        }
    }

    fn insert(&mut self, lhs: Vec<u16>, rhs: Vec<u16>) -> usize {
        let id = self.lhs.len();
        let mut node = 0usize;
        for &c in lhs.iter().rev() {
            let nxt = self.trie[node].next[c as usize];
            node = if nxt == NONE {
                let fresh = self.trie.len();
                self.trie.push(TrieNode { next: vec![NONE; self.ncodes].into_boxed_slice(), rule: NONE });
                self.trie[node].next[c as usize] = fresh as u32;
                fresh
            } else {
                nxt as usize
            };
        }
        self.trie[node].rule = id as u32;
        self.lhs.push(lhs);
        self.rhs.push(rhs);
        self.alive.push(true);
        self.alive_count += 1;
        id
    }

    fn kill(&mut self, id: usize) {
        if !self.alive[id] {
            return;
        }
        self.alive[id] = false;
        self.alive_count -= 1;
        let mut node = 0usize;
        for &c in self.lhs[id].iter().rev() {
            node = self.trie[node].next[c as usize] as usize;
        }
        if self.trie[node].rule == id as u32 {
            self.trie[node].rule = NONE;
        }
    }

    /// Rule matching a suffix of `out`, shortest suffix first, skipping `skip`.
    #[inline]
    fn suffix_match(&self, out: &[u16], skip: u32) -> Option<usize> {
        let mut node = 0usize;
        for &c in out.iter().rev() {
            let nxt = self.trie[node].next[c as usize];
            if nxt == NONE {
                return None;
            }
            node = nxt as usize;
            let r = self.trie[node].rule;
            if r != NONE && r != skip {
                return Some(r as usize);
            }
        }
        None
    }

    fn reduce(&self, input: &[u16]) -> Vec<u16> {
        let mut out: Vec<u16> = Vec::with_capacity(input.len());
        let mut pending: Vec<u16> = input.iter().rev().copied().collect();
        while let Some(x) = pending.pop() {
            out.push(x);
            if let Some(r) = self.suffix_match(&out, NONE) {
                out.truncate(out.len() - self.lhs[r].len());
                pending.extend(self.rhs[r].iter().rev());
            }
        }
        out
    }

    /// True if some rule other than `id` matches a factor of rule `id`'s lhs.
    fn lhs_reducible_by_other(&self, id: usize) -> bool {
        let l = &self.lhs[id];
        (1..=l.len()).any(|end| self.suffix_match(&l[..end], id as u32).is_some())
    }
}

fn shortlex_codes(x: &[u16], y: &[u16]) -> Ordering {
    x.len().cmp(&y.len()).then_with(|| x.cmp(y))
}

fn to_codes(w: &[Generator]) -> Vec<u16> {
    w.iter().map(|g| g.code() as u16).collect()
}

fn to_letters(v: &[u16]) -> Vec<Generator> {
    v.iter().map(|&c| Generator::from_code(c as usize)).collect()
}

/// A set of rules over the letters of a rank-`m` alphabet.
#[derive(Clone, Debug)]
pub struct RewritingSystem {
    rank: usize,
    rules: RuleSet,
    confluent: bool,
    stats: KbStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("normal forms can only be counted in a confluent system")]
    NotConfluent,
}

/// Seeds the cancellation rules plus one rule per relator: the relator split
/// into a longer prefix and the inverse of the remaining suffix.
pub fn rules_from_presentation(p: &Presentation) -> RewritingSystem {
    let m = p.rank();
    let mut rules = RuleSet::new(2 * m);
    for c in 0..2 * m as u16 {
        rules.insert(vec![c, c ^ 1], Vec::new());
    }
    for r in p.relators() {
        let codes: Vec<u16> = r.codes().map(|c| c as u16).collect();
        let split = codes.len() / 2 + 1;
        let lhs = codes[..split].to_vec();
        let rhs: Vec<u16> = codes[split..].iter().rev().map(|c| c ^ 1).collect();
        rules.insert(lhs, rhs);
    }
    let max_rule_len = rules.lhs.iter().map(|l| l.len()).max().unwrap_or(0);
    RewritingSystem {
        rank: m,
        stats: KbStats { rules_generated: rules.alive_count, max_rule_len, steps: 0, outcome: KbOutcome::NotRun },
        rules,
        confluent: false,
    }
}

impl RewritingSystem {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_confluent(&self) -> bool {
        self.confluent
    }

    pub fn stats(&self) -> KbStats {
        self.stats
    }

    /// Live rules in shortlex order of their left-hand sides.
    pub fn rules(&self) -> Vec<RewriteRule> {
        let mut ids: Vec<usize> = (0..self.rules.lhs.len()).filter(|&i| self.rules.alive[i]).collect();
        ids.sort_by(|&a, &b| shortlex_codes(&self.rules.lhs[a], &self.rules.lhs[b]));
        ids.into_iter()
            .map(|i| RewriteRule { lhs: to_letters(&self.rules.lhs[i]), rhs: to_letters(&self.rules.rhs[i]) })
            .collect()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.alive_count
    }

    /// One `lhs -> rhs` line per rule.
    pub fn export_rules(&self) -> String {
        self.rules().iter().map(|r| format!("{r}\n")).collect()
    }

    pub fn reduce_letters(&self, w: &[Generator]) -> Vec<Generator> {
        to_letters(&self.rules.reduce(&to_codes(w)))
    }

    pub fn reduce(&self, w: &Word) -> Word {
        Word::from_letters(self.reduce_letters(w.letters()))
    }

    fn is_irreducible_extension(&self, prefix: &[u16]) -> bool {
        self.rules.suffix_match(prefix, NONE).is_none()
    }

    /// Irreducible words of length `<= max_len`, in shortlex order.
    pub fn normal_forms(&self, max_len: usize) -> Result<Vec<Word>, RewriteError> {
        if !self.confluent {
            return Err(RewriteError::NotConfluent);
        }
        let mut out = vec![Word::identity()];
        let mut level: Vec<Vec<u16>> = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &level {
                for c in 0..2 * self.rank as u16 {
                    let mut v = w.clone();
                    v.push(c);
                    if self.is_irreducible_extension(&v) {
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            out.extend(next.iter().map(|v| Word::from_letters(to_letters(v))));
            level = next;
        }
        Ok(out)
    }
}

pub fn reduce(sys: &RewritingSystem, w: &Word) -> Word {
    sys.reduce(w)
}

struct Completion {
    rules: RuleSet,
    processed: Vec<bool>,
    queue: BinaryHeap<Reverse<(usize, usize)>>,
    pending: VecDeque<(Vec<u16>, Vec<u16>)>,
    budget: KbBudget,
    steps: u64,
    generated: usize,
    max_rule_len: usize,
    dropped: bool,
    last_interreduce: usize,
}

impl Completion {
    fn orient_pending(&mut self) {
        while let Some((u, v)) = self.pending.pop_front() {
            let u = self.rules.reduce(&u);
            let v = self.rules.reduce(&v);
            let (lhs, rhs) = match shortlex_codes(&u, &v) {
                Ordering::Equal => continue,
                Ordering::Greater => (u, v),
                Ordering::Less => (v, u),
            };
            if lhs.len() > self.budget.max_len {
                self.dropped = true;
                continue;
            }
            self.max_rule_len = self.max_rule_len.max(lhs.len());
            let len = lhs.len();
            let id = self.rules.insert(lhs, rhs);
            self.processed.push(false);
            self.queue.push(Reverse((len, id)));
            self.generated += 1;
        }
    }

    /// Drops rules whose lhs is reducible by another rule (their equations are
    /// re-queued) and normalizes every rhs.
    fn interreduce(&mut self) {
        let ids: Vec<usize> = (0..self.rules.lhs.len()).filter(|&i| self.rules.alive[i]).collect();
        for &i in ids.iter().rev() {
            if self.rules.alive[i] && self.rules.lhs_reducible_by_other(i) {
                let eq = (self.rules.lhs[i].clone(), self.rules.rhs[i].clone());
                self.rules.kill(i);
                self.pending.push_back(eq);
            }
        }
        for &i in &ids {
            if self.rules.alive[i] {
                let r = self.rules.reduce(&self.rules.rhs[i]);
                self.rules.rhs[i] = r;
            }
        }
        self.orient_pending();
        self.last_interreduce = self.rules.alive_count;
    }

    fn overlaps(&mut self, i: usize, j: usize) {
        let li = self.rules.lhs[i].clone();
        let lj = self.rules.lhs[j].clone();
        for k in 1..li.len().min(lj.len()) {
            if li[li.len() - k..] == lj[..k] {
                let mut left = self.rules.rhs[i].clone();
                left.extend_from_slice(&lj[k..]);
                let mut right = li[..li.len() - k].to_vec();
                right.extend_from_slice(&self.rules.rhs[j]);
                self.pending.push_back((left, right));
                self.steps += 1;
            }
        }
    }

    fn out_of_budget(&self) -> Option<KbOutcome> {
        if self.rules.alive_count > self.budget.max_rules {
            Some(KbOutcome::RuleBudget)
        } else if self.steps > self.budget.max_steps {
            Some(KbOutcome::StepBudget)
        } else {
            None
        }
    }

    fn run(&mut self) -> KbOutcome {
        loop {
            self.interreduce();
            if let Some(o) = self.out_of_budget() {
                return o;
            }
            let mut worked = false;
            while let Some(Reverse((_, i))) = self.queue.pop() {
                if !self.rules.alive[i] || self.processed[i] {
                    continue;
                }
                worked = true;
                self.processed[i] = true;
                let partners: Vec<usize> = (0..self.rules.lhs.len())
                    .filter(|&j| self.rules.alive[j] && self.processed[j])
                    .collect();
                for j in partners {
                    if !self.rules.alive[i] {
                        break;
                    }
                    if !self.rules.alive[j] {
                        continue;
                    }
                    self.overlaps(i, j);
                    if i != j {
                        self.overlaps(j, i);
                    }
                    self.orient_pending();
                    if let Some(o) = self.out_of_budget() {
                        return o;
                    }
                }
                if self.rules.alive_count > 2 * self.last_interreduce + 16 {
                    self.interreduce();
                }
            }
            if !worked {
                break;
            }
        }
        if self.dropped {
            KbOutcome::LengthBudget
        } else {
            KbOutcome::Completed
        }
    }
}

/// Knuth–Bendix completion within `budget`. On budget exhaustion the returned
/// system is not confluent but every rule is still a consequence of the
/// relators, so reducing a word to `1` remains a proof of triviality.
pub fn knuth_bendix(sys: &RewritingSystem, budget: KbBudget) -> RewritingSystem {
    let mut c = Completion {
        rules: RuleSet::new(sys.rules.ncodes),
        processed: Vec::new(),
        queue: BinaryHeap::new(),
        pending: VecDeque::new(),
        budget,
        steps: 0,
        generated: 0,
        max_rule_len: 0,
        dropped: false,
        last_interreduce: 0,
    };
    for i in 0..sys.rules.lhs.len() {
        if sys.rules.alive[i] {
            c.pending.push_back((sys.rules.lhs[i].clone(), sys.rules.rhs[i].clone()));
        }
    }
    c.orient_pending();
    let outcome = c.run();
    debug_assert!((0..c.rules.lhs.len())
        .filter(|&i| c.rules.alive[i])
        .all(|i| shortlex_codes(&c.rules.rhs[i], &c.rules.lhs[i]) == Ordering::Less));
    let rules = compact(&c.rules);
    RewritingSystem {
        rank: sys.rank,
        confluent: outcome == KbOutcome::Completed,
        stats: KbStats { rules_generated: c.generated, max_rule_len: c.max_rule_len, steps: c.steps, outcome },
        rules,
    }
}

fn compact(rules: &RuleSet) -> RuleSet {
    let mut ids: Vec<usize> = (0..rules.lhs.len()).filter(|&i| rules.alive[i]).collect();
    ids.sort_by(|&a, &b| shortlex_codes(&rules.lhs[a], &rules.lhs[b]));
    let mut out = RuleSet::new(rules.ncodes);
    for i in ids {
        out.insert(rules.lhs[i].clone(), rules.rhs[i].clone());
    }
    out
}

/// Counts of normal forms by length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalFormCount {
    pub per_length: Vec<u64>,
    pub total: u64,
    /// Some length up to `max_len` has no normal forms, so `total` is the group order.
    pub stabilized: bool,
}

pub fn count_normal_forms(sys: &RewritingSystem, max_len: usize) -> Result<NormalFormCount, RewriteError> {
    if !sys.confluent {
        return Err(RewriteError::NotConfluent);
    }
    let mut stack: Vec<u16> = Vec::new();
    let mut counts = vec![0u64; max_len + 1];
    counts[0] = 1;
    count_dfs(sys, &mut stack, max_len, &mut counts);
    let mut per_length = Vec::new();
    let mut stabilized = false;
    for (len, &c) in counts.iter().enumerate() {
        if c == 0 && len > 0 {
            stabilized = true;
            break;
        }
        per_length.push(c);
    }
    let total = per_length.iter().sum();
    Ok(NormalFormCount { per_length, total, stabilized })
}

fn count_dfs(sys: &RewritingSystem, stack: &mut Vec<u16>, max_len: usize, counts: &mut [u64]) {
    if stack.len() == max_len {
        return;
    }
    for c in 0..2 * sys.rank as u16 {
        stack.push(c);
        if sys.is_irreducible_extension(stack) {
            counts[stack.len()] += 1;
            count_dfs(sys, stack, max_len, counts);
        }
        stack.pop();
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerOrder {
    /// `w^d` reduces to the identity and no smaller positive power does.
    Finite(u64),
    NotFound,
}

/// Smallest `d <= n_max` with `reduce(w^d) = 1`. A `Finite(d)` answer proves
/// `w^d = 1`; in a non-confluent system the true order may be a proper divisor.
pub fn finite_order_by_powers(sys: &RewritingSystem, w: &Word, n_max: u64) -> PowerOrder {
    let base = to_codes(w.letters());
    if sys.rules.reduce(&base).is_empty() {
        return PowerOrder::Finite(1);
    }
    let mut acc: Vec<u16> = Vec::new();
    for d in 1..=n_max {
        acc.extend_from_slice(&base);
        acc = sys.rules.reduce(&acc);
        if acc.is_empty() {
            return PowerOrder::Finite(d);
        }
    }
    PowerOrder::NotFound
}
