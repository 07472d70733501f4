//! The period tower: `A_i` is the shortlex-least word of infinite order in the
//! group presented by `A_1^n, ..., A_{i-1}^n`.
//!
//! Each rank scans reduced words in shortlex order and asks the oracle about
//! every candidate that survives the filters. The scan stops at the first
//! `Infinite` verdict (the period) or the first `Unknown` (inconclusive).
//! Candidates are evaluated in batches on a thread pool but merged in
//! shortlex order, so the outcome never depends on the number of threads.
//!
//! The tower terminates when coset enumeration closes on the current group.
//! If its exponent divides `n` it is a quotient of `B(m, n)`, and since every
//! relator is an `n`-th power it also has `B(m, n)` as a quotient, so the two
//! coincide.

use std::fmt::Write as _;

use num_integer::Integer;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cosets::{element_order_finite, FiniteRealization};
use crate::oracle::{EnumerationOutcome, FiniteEvidence, GroupContext, OracleBudget, OrderVerdict};
use crate::presentation::{tower_presentation, Presentation, TowerState, TowerStatus};
use crate::rewrite::{finite_order_by_powers, PowerOrder};
use crate::subgrp::{abelian_quotient, lower_central_quotient, trivial_quotient, verify_certificate, AbelianInvariants, Certificate, KernelAbelianization};
use crate::words::{enumerate_reduced, Word, TIE_BREAK_ID};

pub const TOWER_FORMAT: &str = "burnside-tower/1";

const FIRST_BATCH: usize = 16;
const MAX_BATCH: usize = 1024;

#[derive(Debug, Error)]
pub enum TowerError {
    #[error("rank must be at least 1 and the exponent at least 1")]
    InvalidParameters,
    #[error("checkpoint has format {0:?}, expected {TOWER_FORMAT:?}")]
    Format(String),
    #[error("checkpoint is for m={found_m}, n={found_n} but m={m}, n={n} was requested")]
    Mismatch { m: usize, n: usize, found_m: usize, found_n: usize },
    #[error("checkpoint is not resumable: status {0:?}")]
    NotResumable(TowerStatus),
    #[error("checkpoint is inconsistent: {0}")]
    Inconsistent(String),
    #[error("could not start worker threads: {0}")]
    Threads(String),
}

/// Everything that determines a tower run. The thread count is deliberately
/// not part of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerConfig {
    pub m: usize,
    pub n: u64,
    pub budget: OracleBudget,
    /// Skip words that are not cyclically reduced or are proper powers.
    pub filters: bool,
    /// Candidates logged per rank before giving up.
    pub max_candidates: usize,
    pub max_ranks: usize,
    /// Longest power relator the tower will build.
    pub max_relator_len: usize,
}

impl TowerConfig {
    pub fn new(m: usize, n: u64) -> Self {
        TowerConfig { m, n, budget: OracleBudget::default(), filters: true, max_candidates: 100_000, max_ranks: 64, max_relator_len: 1 << 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CandidateOutcome {
    /// Conjugate to the smaller word `core`, which has the same order.
    NotCyclicallyReduced { core: Word },
    /// `root^exponent`; `root` is smaller and is infinite iff this word is.
    ProperPower { root: Word, exponent: usize },
    Evaluated { result: OrderVerdict },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub word: Word,
    pub outcome: CandidateOutcome,
}

impl CandidateRecord {
    pub fn verdict(&self) -> Option<&OrderVerdict> {
        match &self.outcome {
            CandidateOutcome::Evaluated { result } => Some(result),
            _ => None,
        }
    }
}

/// What the oracle learned about a tower group before looking at words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSummary {
    pub presentation: Presentation,
    pub abelianization: AbelianInvariants,
    pub enumeration: EnumerationOutcome,
    pub kb: crate::rewrite::KbStats,
    pub quotients: Vec<String>,
}

impl StageSummary {
    fn of(ctx: &GroupContext) -> Self {
        StageSummary {
            presentation: ctx.presentation().clone(),
            abelianization: ctx.abelian_invariants().clone(),
            enumeration: ctx.enumeration().clone(),
            kb: ctx.kb_stats(),
            quotients: ctx.quotient_names().into_iter().map(String::from).collect(),
        }
    }
}

/// The search for the period of one rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRecord {
    pub rank: usize,
    pub stage: StageSummary,
    pub candidates: Vec<CandidateRecord>,
    pub period: Option<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentCheck {
    pub divides: bool,
    /// Shortlex-least word `w` with `w^n != 1`.
    pub witness: Option<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalGroup {
    pub stage: StageSummary,
    pub order: usize,
    pub exponent: u64,
    pub exponent_check: ExponentCheck,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inconclusive {
    pub rank: usize,
    pub candidate: Option<Word>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodOrder {
    pub rank: usize,
    pub period: Word,
    pub order: u64,
    pub equals_n: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub max_len: usize,
    pub words_checked: usize,
    pub failures: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndependenceEvidence {
    /// `word` has infinite order once the relator is dropped, while every
    /// element of the tower group has finite order.
    Certificate { word: Word, quotient: String, certificate: Box<Certificate> },
    /// Coset enumeration closes on the smaller presentation with another order.
    DifferentOrder { order: usize },
    Unresolved { attempts: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceRecord {
    pub rank: usize,
    pub relator: Word,
    pub evidence: IndependenceEvidence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub period_orders: Vec<PeriodOrder>,
    pub burnside_identity: IdentityCheck,
    pub independence: Vec<IndependenceRecord>,
    pub unresolved: usize,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.period_orders.iter().all(|p| p.equals_n) && self.burnside_identity.failures.is_empty() && self.unresolved == 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub finite_checked: usize,
    pub infinite_checked: usize,
    pub filtered_checked: usize,
    pub minimality_checked: usize,
    pub disagreements: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerReport {
    pub format: String,
    pub tie_break: String,
    pub config: TowerConfig,
    pub status: TowerStatus,
    pub periods: Vec<Word>,
    pub ranks: Vec<RankRecord>,
    pub final_group: Option<FinalGroup>,
    pub inconclusive: Option<Inconclusive>,
    pub verification: Option<VerificationReport>,
    pub audit: Option<AuditReport>,
}

impl TowerReport {
    fn new(config: TowerConfig) -> Self {
        TowerReport {
            format: TOWER_FORMAT.to_string(),
            tie_break: TIE_BREAK_ID.to_string(),
            config,
            status: TowerStatus::Running,
            periods: Vec::new(),
            ranks: Vec::new(),
            final_group: None,
            inconclusive: None,
            verification: None,
            audit: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, TowerError> {
        let report: TowerReport = serde_json::from_str(text).map_err(|e| TowerError::Inconsistent(e.to_string()))?;
        if report.format != TOWER_FORMAT {
            return Err(TowerError::Format(report.format));
        }
        Ok(report)
    }

    pub fn state(&self) -> TowerState {
        TowerState { m: self.config.m, n: self.config.n as usize, periods: self.periods.clone(), status: self.status }
    }

    pub fn text_summary(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let _ = writeln!(out, "tower m={} n={} ({})", c.m, c.n, self.tie_break);
        for r in &self.ranks {
            let evaluated = r.candidates.iter().filter(|x| x.verdict().is_some()).count();
            match &r.period {
                Some(p) => {
                    let _ = writeln!(out, "  A_{} = {}  ({} candidates, {} evaluated)", r.rank, p, r.candidates.len(), evaluated);
                }
                None => {
                    let _ = writeln!(out, "  A_{} not found ({} candidates, {} evaluated)", r.rank, r.candidates.len(), evaluated);
                }
            }
        }
        let _ = writeln!(out, "status: {:?}", self.status);
        if let Some(f) = &self.final_group {
            let _ = writeln!(out, "final group: order {}, exponent {}", f.order, f.exponent);
            if let Some(w) = &f.exponent_check.witness {
                let _ = writeln!(out, "  {w}^{} is not the identity", c.n);
            }
        }
        if let Some(i) = &self.inconclusive {
            let at = i.candidate.as_ref().map(|w| format!(" at {w}")).unwrap_or_default();
            let _ = writeln!(out, "inconclusive in rank {}{at}: {}", i.rank, i.reason);
        }
        if let Some(v) = &self.verification {
            let orders: Vec<String> = v.period_orders.iter().map(|p| format!("{}:{}", p.period, p.order)).collect();
            let _ = writeln!(out, "period orders: {}", orders.join(" "));
            let _ = writeln!(
                out,
                "identity x^{} = 1: {} words up to length {}, {} failures",
                c.n,
                v.burnside_identity.words_checked,
                v.burnside_identity.max_len,
                v.burnside_identity.failures.len()
            );
            for r in &v.independence {
                let what = match &r.evidence {
                    IndependenceEvidence::Certificate { word, quotient, .. } => {
                        format!("{word} has infinite order (certificate over {quotient})")
                    }
                    IndependenceEvidence::DifferentOrder { order } => format!("group has order {order}"),
                    IndependenceEvidence::Unresolved { .. } => "unresolved".to_string(),
                };
                let _ = writeln!(out, "without {}: {}", r.relator, what);
            }
        }
        if let Some(a) = &self.audit {
            let _ = writeln!(
                out,
                "audit: {} finite, {} infinite, {} filtered, {} disagreements",
                a.finite_checked,
                a.infinite_checked,
                a.filtered_checked,
                a.disagreements.len()
            );
        }
        out
    }
}

fn pool(jobs: usize) -> Result<ThreadPool, TowerError> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| TowerError::Threads(e.to_string()))
}

fn filter(w: &Word) -> Option<CandidateOutcome> {
    let (core, conj) = w.cyclic_reduce();
    if !conj.is_empty() {
        return Some(CandidateOutcome::NotCyclicallyReduced { core });
    }
    w.proper_power_root().map(|(root, exponent)| CandidateOutcome::ProperPower { root, exponent })
}

/// Least common multiple of the element orders.
pub fn group_exponent(r: &FiniteRealization) -> u64 {
    (0..r.order()).fold(1u64, |acc, g| acc.lcm(&r.element_order_of(g)))
}

/// Does `g^n = 1` hold for every element?
pub fn exponent_divides(r: &FiniteRealization, n: u64) -> ExponentCheck {
    let mut elements: Vec<usize> = (0..r.order()).collect();
    elements.sort_by(|&a, &b| r.rep(a).cmp(r.rep(b)));
    let witness = elements.into_iter().find(|&g| !n.is_multiple_of(r.element_order_of(g))).map(|g| r.rep(g).clone());
    ExponentCheck { divides: witness.is_none(), witness }
}

enum ScanEnd {
    Found(Word),
    Stopped { candidate: Option<Word>, reason: String },
}

fn scan(ctx: &GroupContext, record: &mut RankRecord, config: &TowerConfig, pool: &ThreadPool) -> ScanEnd {
    let cursor = record.candidates.last().map(|c| c.word.clone());
    let mut words = enumerate_reduced(config.m, cursor.as_ref());
    let mut batch_size = FIRST_BATCH;
    loop {
        let batch: Vec<Word> = words.by_ref().take(batch_size).collect();
        let filtered: Vec<Option<CandidateOutcome>> =
            batch.iter().map(|w| if config.filters { filter(w) } else { None }).collect();
        let todo: Vec<usize> = (0..batch.len()).filter(|&i| filtered[i].is_none()).collect();
        let mut verdicts: Vec<Option<OrderVerdict>> = pool.install(|| {
            todo.par_iter().map(|&i| Some(ctx.element_order(&batch[i], config.n))).collect()
        });
        let mut verdicts = verdicts.iter_mut();
        for (w, f) in batch.iter().zip(filtered) {
            if record.candidates.len() >= config.max_candidates {
                return ScanEnd::Stopped {
                    candidate: Some(w.clone()),
                    reason: format!("candidate limit {} reached", config.max_candidates),
                };
            }
            let outcome = match f {
                Some(o) => o,
                None => CandidateOutcome::Evaluated { result: verdicts.next().unwrap().take().unwrap() },
            };
            let decision = match &outcome {
                CandidateOutcome::Evaluated { result } if result.is_infinite() => Some(ScanEnd::Found(w.clone())),
                CandidateOutcome::Evaluated { result } if result.is_unknown() => Some(ScanEnd::Stopped {
                    candidate: Some(w.clone()),
                    reason: "oracle could not decide the order".into(),
                }),
                _ => None,
            };
            record.candidates.push(CandidateRecord { word: w.clone(), outcome });
            if let Some(d) = decision {
                return d;
            }
        }
        batch_size = (batch_size * 2).min(MAX_BATCH);
    }
}

fn drive(mut report: TowerReport, jobs: usize) -> Result<TowerReport, TowerError> {
    let pool = pool(jobs)?;
    let config = report.config;
    loop {
        let rank = report.periods.len() + 1;
        if let Some(p) = report.periods.iter().find(|p| (p.len() as u64).saturating_mul(config.n) > config.max_relator_len as u64) {
            report.status = TowerStatus::OracleInconclusive;
            report.inconclusive = Some(Inconclusive {
                rank,
                candidate: None,
                reason: format!("relator {p}^{} is longer than {} letters", config.n, config.max_relator_len),
            });
            return Ok(report);
        }
        let mut st = report.state();
        st.status = TowerStatus::Running;
        let ctx = GroupContext::new(&tower_presentation(&st), config.budget);
        if let Some(r) = ctx.realization() {
            let exponent_check = exponent_divides(r, config.n);
            report.status =
                if exponent_check.divides { TowerStatus::TerminatedEqualsBurnside } else { TowerStatus::StalledDivergent };
            report.final_group = Some(FinalGroup {
                stage: StageSummary::of(&ctx),
                order: r.order(),
                exponent: group_exponent(r),
                exponent_check,
            });
            report.inconclusive = None;
            return Ok(report);
        }
        if report.periods.len() >= config.max_ranks {
            report.status = TowerStatus::OracleInconclusive;
            report.inconclusive =
                Some(Inconclusive { rank, candidate: None, reason: format!("rank limit {} reached", config.max_ranks) });
            return Ok(report);
        }
        let mut record = match report.ranks.last() {
            Some(r) if r.period.is_none() && r.rank == rank => report.ranks.pop().unwrap(),
            _ => RankRecord { rank, stage: StageSummary::of(&ctx), candidates: Vec::new(), period: None },
        };
        // a resumed rank retries its undecided candidate under the new budget
        if record.candidates.last().and_then(|c| c.verdict()).is_some_and(|v| v.is_unknown()) {
            record.candidates.pop();
        }
        record.stage = StageSummary::of(&ctx);
        match scan(&ctx, &mut record, &config, &pool) {
            ScanEnd::Found(w) => {
                record.period = Some(w.clone());
                report.ranks.push(record);
                report.periods.push(w);
            }
            ScanEnd::Stopped { candidate, reason } => {
                report.ranks.push(record);
                report.status = TowerStatus::OracleInconclusive;
                report.inconclusive = Some(Inconclusive { rank, candidate, reason });
                return Ok(report);
            }
        }
    }
}

pub fn run_tower(config: TowerConfig, jobs: usize) -> Result<TowerReport, TowerError> {
    if config.m == 0 || config.n == 0 || config.n > usize::MAX as u64 {
        return Err(TowerError::InvalidParameters);
    }
    drive(TowerReport::new(config), jobs)
}

/// Continues an inconclusive run with a (possibly larger) budget. `config`
/// must name the same `m` and `n`.
pub fn resume_tower(checkpoint: TowerReport, config: TowerConfig, jobs: usize) -> Result<TowerReport, TowerError> {
    if checkpoint.format != TOWER_FORMAT {
        return Err(TowerError::Format(checkpoint.format));
    }
    if (checkpoint.config.m, checkpoint.config.n) != (config.m, config.n) {
        return Err(TowerError::Mismatch {
            m: config.m,
            n: config.n as usize,
            found_m: checkpoint.config.m,
            found_n: checkpoint.config.n as usize,
        });
    }
    if !matches!(checkpoint.status, TowerStatus::OracleInconclusive | TowerStatus::Running) {
        return Err(TowerError::NotResumable(checkpoint.status));
    }
    let found: Vec<Word> = checkpoint.ranks.iter().filter_map(|r| r.period.clone()).collect();
    if found != checkpoint.periods {
        return Err(TowerError::Inconsistent("periods do not match the rank records".into()));
    }
    let mut report = checkpoint;
    report.config = config;
    report.status = TowerStatus::Running;
    report.inconclusive = None;
    report.verification = None;
    report.audit = None;
    drive(report, jobs)
}

/// Order of every period in the realized group.
pub fn verify_exact_period_orders(r: &FiniteRealization, periods: &[Word], n: u64) -> Vec<PeriodOrder> {
    periods
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let order = element_order_finite(r, a);
            PeriodOrder { rank: i + 1, period: a.clone(), order, equals_n: order == n }
        })
        .collect()
}

/// `w^n = 1` for every reduced word of length at most `max_len`.
pub fn check_identity(r: &FiniteRealization, n: u64, max_len: usize) -> IdentityCheck {
    let mut words_checked = 0;
    let mut failures = Vec::new();
    for w in enumerate_reduced(r.rank(), None).take_while(|w| w.len() <= max_len) {
        words_checked += 1;
        if !n.is_multiple_of(element_order_finite(r, &w)) {
            failures.push(w);
        }
    }
    IdentityCheck { max_len, words_checked, failures }
}

fn independence_of(
    p: &Presentation,
    i: usize,
    period: &Word,
    n: u64,
    tower_group: &FiniteRealization,
    budget: OracleBudget,
) -> IndependenceEvidence {
    let q = p.without_relator(i);
    let mut attempts = Vec::new();

    // cheap first: certificates for the period itself over known quotients
    let mut ladder = vec![("trivial".to_string(), trivial_quotient(&q))];
    if let Some(a) = abelian_quotient(&q, 0, budget.max_quotient_order).or_else(|| abelian_quotient(&q, 2, budget.max_quotient_order)) {
        ladder.push(("abelianization".into(), a));
    }
    ladder.push(("tower group".into(), tower_group.clone()));
    for (name, quotient) in &ladder {
        match KernelAbelianization::new(&q, quotient).and_then(|k| k.certificate(period)) {
            Ok(cert) => {
                return IndependenceEvidence::Certificate { word: period.clone(), quotient: name.clone(), certificate: Box::new(cert) }
            }
            Err(e) => attempts.push(format!("{period} over {name}: {e}")),
        }
    }

    let mut ctx = GroupContext::new(&q, budget);
    ctx.add_quotient("tower group", tower_group.clone());
    if let Some(r) = ctx.realization() {
        if r.order() != tower_group.order() {
            return IndependenceEvidence::DifferentOrder { order: r.order() };
        }
        attempts.push(format!("enumeration closed with the same order {}", r.order()));
        return IndependenceEvidence::Unresolved { attempts };
    }
    for w in enumerate_reduced(p.rank(), None).take_while(|w| w.len() <= 4) {
        if filter(&w).is_some() {
            continue;
        }
        if let OrderVerdict::Infinite { quotient, certificate } = ctx.element_order(&w, n) {
            return IndependenceEvidence::Certificate { word: w, quotient, certificate };
        }
    }
    attempts.push("no word of length at most 4 was certified infinite".into());
    IndependenceEvidence::Unresolved { attempts }
}

/// For each period, drops its power relator and looks for evidence that the
/// presented group changes.
pub fn verify_independence(
    report: &TowerReport,
    tower_group: &FiniteRealization,
    budget: OracleBudget,
    jobs: usize,
) -> Result<Vec<IndependenceRecord>, TowerError> {
    let p = tower_presentation(&report.state());
    let pool = pool(jobs)?;
    let n = report.config.n;
    Ok(pool.install(|| {
        report
            .periods
            .par_iter()
            .enumerate()
            .map(|(i, a)| IndependenceRecord {
                rank: i + 1,
                relator: p.relators()[i].clone(),
                evidence: independence_of(&p, i, a, n, tower_group, budget),
            })
            .collect()
    }))
}

/// The realized final group of a terminated report, recomputed.
pub fn final_realization(report: &TowerReport) -> Option<FiniteRealization> {
    report.final_group.as_ref()?;
    GroupContext::new(&tower_presentation(&report.state()), report.config.budget).realization().cloned()
}

/// Runs the verification suite on a terminated tower and stores it in the report.
pub fn verify_tower(report: &mut TowerReport, jobs: usize) -> Result<(), TowerError> {
    let Some(r) = final_realization(report) else {
        return Ok(());
    };
    let n = report.config.n;
    let period_orders = verify_exact_period_orders(&r, &report.periods, n);
    let burnside_identity = check_identity(&r, n, 4);
    let independence = verify_independence(report, &r, report.config.budget, jobs)?;
    let unresolved = independence.iter().filter(|x| matches!(x.evidence, IndependenceEvidence::Unresolved { .. })).count();
    report.verification = Some(VerificationReport { period_orders, burnside_identity, independence, unresolved });
    Ok(())
}

fn audit_candidate(
    ctx: &GroupContext,
    c: &CandidateRecord,
    n: u64,
    final_group: Option<&FiniteRealization>,
) -> (&'static str, Option<String>) {
    let w = &c.word;
    match &c.outcome {
        CandidateOutcome::Evaluated { result: OrderVerdict::Finite { order, evidence } } => {
            let d = *order;
            let problem = match evidence {
                FiniteEvidence::CosetEnumeration { group_order } => match ctx.realization() {
                    Some(r) if r.order() == *group_order && element_order_finite(r, w) == d => None,
                    _ => Some("coset enumeration does not reproduce the order".to_string()),
                },
                FiniteEvidence::PowerReduction { power, confluent, exact_in, .. } => {
                    let sys = ctx.rewriting();
                    if !sys.reduce(&w.pow(*power as usize)).is_empty() {
                        Some(format!("{w}^{power} does not rewrite to 1"))
                    } else if *confluent && finite_order_by_powers(sys, w, d) != PowerOrder::Finite(d) {
                        Some("a smaller power rewrites to 1".to_string())
                    } else if let Some(name) = exact_in {
                        let ok = quotient_order(ctx, name, w) == Some(d);
                        (!ok).then(|| format!("order in quotient {name} is not {d}"))
                    } else {
                        None
                    }
                }
            };
            let problem = problem.or_else(|| {
                final_group
                    .filter(|r| d % element_order_finite(r, w) != 0)
                    .map(|_| "order in the final group does not divide the reported order".to_string())
            });
            ("finite", problem.map(|p| format!("{w}: {p}")))
        }
        CandidateOutcome::Evaluated { result: OrderVerdict::Infinite { certificate, .. } } => {
            let problem = if certificate.word != *w || certificate.presentation != *ctx.presentation() {
                Some("certificate is for another word or presentation".to_string())
            } else {
                verify_certificate(certificate).err().map(|e| e.to_string())
            };
            ("infinite", problem.map(|p| format!("{w}: {p}")))
        }
        CandidateOutcome::Evaluated { result: OrderVerdict::Unknown { .. } } => ("unknown", None),
        CandidateOutcome::NotCyclicallyReduced { .. } | CandidateOutcome::ProperPower { .. } => {
            let v = ctx.element_order(w, n);
            let problem = (!v.is_finite()).then(|| format!("{w}: filtered but the oracle says {}", v.summary()));
            ("filtered", problem)
        }
    }
}

fn quotient_order(ctx: &GroupContext, name: &str, w: &Word) -> Option<u64> {
    let p = ctx.presentation();
    let q = match name {
        "trivial" => Some(trivial_quotient(p)),
        "abelianization" => abelian_quotient(p, 0, ctx.budget().max_quotient_order),
        "abelianization mod 2" => abelian_quotient(p, 2, ctx.budget().max_quotient_order),
        other => {
            let class = other.strip_prefix("lower central quotient of class ")?.parse().ok()?;
            lower_central_quotient(p, class, ctx.budget().quotient_cosets)
        }
    }?;
    Some(element_order_finite(&q, w))
}

/// Re-checks every logged verdict from scratch: finite orders against their
/// proofs and the final group, certificates by replay, filtered candidates
/// by running the oracle on them, and the shortlex order of each log.
pub fn audit_tower(report: &TowerReport, jobs: usize) -> Result<AuditReport, TowerError> {
    let pool = pool(jobs)?;
    let final_group = final_realization(report);
    let mut audit = AuditReport::default();
    let n = report.config.n;
    for record in &report.ranks {
        let st = TowerState {
            m: report.config.m,
            n: n as usize,
            periods: report.periods[..record.rank - 1].to_vec(),
            status: TowerStatus::Running,
        };
        let ctx = GroupContext::new(&tower_presentation(&st), report.config.budget);
        if ctx.presentation() != &record.stage.presentation {
            audit.disagreements.push(format!("rank {}: stage presentation differs", record.rank));
        }
        let expected = enumerate_reduced(report.config.m, None).take(record.candidates.len());
        for (c, e) in record.candidates.iter().zip(expected) {
            audit.minimality_checked += 1;
            if c.word != e {
                audit.disagreements.push(format!("rank {}: log skips {e}", record.rank));
                break;
            }
        }
        if let Some(p) = &record.period {
            let last = record.candidates.last();
            if last.map(|c| &c.word) != Some(p) || !last.and_then(|c| c.verdict()).is_some_and(|v| v.is_infinite()) {
                audit.disagreements.push(format!("rank {}: period is not the last, infinite candidate", record.rank));
            }
            let earlier_infinite = record.candidates[..record.candidates.len() - 1]
                .iter()
                .any(|c| c.verdict().is_some_and(|v| !v.is_finite()));
            if earlier_infinite {
                audit.disagreements.push(format!("rank {}: a smaller candidate is not finite", record.rank));
            }
        }
        let results: Vec<(&'static str, Option<String>)> = pool.install(|| {
            record.candidates.par_iter().map(|c| audit_candidate(&ctx, c, n, final_group.as_ref())).collect()
        });
        for (kind, problem) in results {
            match kind {
                "finite" => audit.finite_checked += 1,
                "infinite" => audit.infinite_checked += 1,
                "filtered" => audit.filtered_checked += 1,
                _ => {}
            }
            if let Some(p) = problem {
                audit.disagreements.push(format!("rank {}: {p}", record.rank));
            }
        }
    }
    Ok(audit)
}
