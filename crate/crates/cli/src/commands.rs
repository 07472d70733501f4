use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use burnside::cosets::{center, enumerate_cosets, realize, CosetStatus, FiniteRealization};
use burnside::dihedral::{embed_search, DihedralProductSpec, EmbedOutcome, FiniteGroupTable};
use burnside::oracle::{GroupContext, OracleBudget, OrderVerdict};
use burnside::presentation::{Presentation, TowerStatus};
use burnside::rewrite::{count_normal_forms, knuth_bendix, rules_from_presentation, KbBudget};
use burnside::subgrp::{abelian_invariants, verify_certificate, Certificate};
use burnside::tower::{audit_tower, resume_tower, run_tower, verify_tower, TowerConfig, TowerReport};
use burnside::Word;
use serde_json::{json, Value};

use crate::{BudgetArgs, Cli, Command, Format};

/// Exponents at or above this are far beyond anything that terminates.
const LARGE_EXPONENT: u64 = 1 << 48;

pub enum Outcome {
    Definitive,
    Inconclusive,
    Stalled,
}

impl Outcome {
    pub fn code(&self) -> u8 {
        match self {
            Outcome::Definitive => 0,
            Outcome::Inconclusive => 2,
            Outcome::Stalled => 3,
        }
    }
}

type Result<T> = std::result::Result<T, String>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_presentation(path: &Path) -> Result<Presentation> {
    let (p, warnings) = Presentation::parse_with_warnings(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(p)
}

fn parse_word(p: &Presentation, text: &str) -> Result<Word> {
    let w: Word = text.parse().map_err(|e| format!("word {text:?}: {e}"))?;
    if w.is_empty() {
        return Err("word must be nonempty".into());
    }
    if w.max_index() > p.rank() {
        return Err(format!("word {w} uses generators beyond rank {}", p.rank()));
    }
    Ok(w)
}

fn oracle_budget(b: &BudgetArgs) -> OracleBudget {
    OracleBudget {
        max_cosets: b.max_cosets,
        kb: KbBudget { max_rules: b.kb_max_rules, max_len: b.kb_max_len, ..KbBudget::default() },
        ..OracleBudget::default()
    }
}

fn emit(cli: &Cli, report: &Value, text: &str) -> Result<()> {
    let json = format!("{}\n", serde_json::to_string_pretty(report).expect("report serializes"));
    if let Some(out) = &cli.out {
        write(out, &json)?;
    }
    match cli.format {
        Format::Json => print!("{json}"),
        Format::Text => print!("{text}"),
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Tower { m, n, budget, max_candidates, jobs, audit, resume, no_filters } => {
            tower(cli, *m, *n, budget, *max_candidates, *jobs, *audit, resume.as_deref(), *no_filters)
        }
        Command::Coset { presentation, subgroup, max_cosets, csv } => coset(cli, presentation, subgroup, *max_cosets, csv.as_deref()),
        Command::Order { presentation, word, n_hint, budget, certificate } => {
            order(cli, presentation, word, *n_hint, budget, certificate.as_deref())
        }
        Command::Kb { presentation, kb_max_rules, kb_max_len, max_len, rules } => {
            kb(cli, presentation, *kb_max_rules, *kb_max_len, *max_len, rules.as_deref())
        }
        Command::Abelian { presentation } => abelian(cli, presentation),
        Command::Embed { group, n, r_max, budget, max_cosets } => embed(cli, group, *n, *r_max, *budget, *max_cosets),
        Command::Center { presentation, max_cosets } => center_cmd(cli, presentation, *max_cosets),
        Command::VerifyCert { certificate } => verify_cert(cli, certificate),
    }
}

#[allow(clippy::too_many_arguments)]
fn tower(
    cli: &Cli,
    m: usize,
    n: u64,
    budget: &BudgetArgs,
    max_candidates: usize,
    jobs: usize,
    audit: bool,
    resume: Option<&Path>,
    no_filters: bool,
) -> Result<Outcome> {
    if n >= LARGE_EXPONENT {
        eprintln!(
            "note: n = {n} is at least 2^48; for such exponents the tower never terminates \
             (every stage is infinite), so this run only ends when a budget is exhausted"
        );
    }
    let config = TowerConfig {
        m,
        n,
        budget: oracle_budget(budget),
        filters: !no_filters,
        max_candidates,
        ..TowerConfig::new(m, n)
    };
    let mut report = match resume {
        Some(path) => {
            let checkpoint = TowerReport::from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
            resume_tower(checkpoint, config, jobs)
        }
        None => run_tower(config, jobs),
    }
    .map_err(|e| e.to_string())?;
    verify_tower(&mut report, jobs).map_err(|e| e.to_string())?;
    if audit {
        report.audit = Some(audit_tower(&report, jobs).map_err(|e| e.to_string())?);
    }
    let value = serde_json::to_value(&report).expect("report serializes");
    emit(cli, &value, &report.text_summary())?;
    if report.audit.as_ref().is_some_and(|a| !a.passed()) {
        return Err("audit found disagreements".into());
    }
    Ok(match report.status {
        TowerStatus::TerminatedEqualsBurnside if report.verification.as_ref().is_none_or(|v| v.unresolved == 0) => Outcome::Definitive,
        TowerStatus::StalledDivergent => Outcome::Stalled,
        _ => Outcome::Inconclusive,
    })
}

fn coset(cli: &Cli, path: &Path, subgroup: &[String], max_cosets: usize, csv: Option<&Path>) -> Result<Outcome> {
    let p = load_presentation(path)?;
    let mut gens = Vec::new();
    for s in subgroup {
        let w: Word = s.parse().map_err(|e| format!("subgroup word {s:?}: {e}"))?;
        if w.max_index() > p.rank() {
            return Err(format!("subgroup word {w} uses generators beyond rank {}", p.rank()));
        }
        gens.push(w);
    }
    let t = enumerate_cosets(&p, &gens, max_cosets);
    if let (Some(out), true) = (csv, t.is_closed()) {
        write(out, &t.to_csv())?;
    }
    let report = json!({
        "schema": "burnside-coset/1",
        "config": { "presentation": p, "subgroup": gens, "max_cosets": max_cosets },
        "status": t.status(),
        "index": t.index(),
        "stats": t.stats(),
    });
    let text = match t.status() {
        CosetStatus::Closed { index } => format!("index {index}\n"),
        CosetStatus::Exhausted { max_cosets } => format!("exhausted at {max_cosets} cosets (index unknown)\n"),
    };
    emit(cli, &report, &text)?;
    Ok(if t.is_closed() { Outcome::Definitive } else { Outcome::Inconclusive })
}

fn order(cli: &Cli, path: &Path, word: &str, n_hint: u64, budget: &BudgetArgs, cert_out: Option<&Path>) -> Result<Outcome> {
    let p = load_presentation(path)?;
    let w = parse_word(&p, word)?;
    let ob = oracle_budget(budget);
    let verdict = GroupContext::new(&p, ob).element_order(&w, n_hint);
    if let (Some(out), Some(cert)) = (cert_out, verdict.certificate()) {
        write(out, &cert.to_json())?;
    }
    let report = json!({
        "schema": "burnside-order/1",
        "config": { "presentation": p, "word": w, "n_hint": n_hint, "budget": ob },
        "verdict": verdict,
    });
    let text = match &verdict {
        OrderVerdict::Finite { order, .. } if verdict.is_exact() => format!("{w} has order {order}\n"),
        OrderVerdict::Finite { order, .. } => format!("{w}^{order} = 1 (order divides {order})\n"),
        OrderVerdict::Infinite { quotient, .. } => format!("{w} has infinite order (certificate over {quotient})\n"),
        OrderVerdict::Unknown { attempts } => {
            let mut s = format!("order of {w} undecided\n");
            for a in attempts {
                let _ = writeln!(s, "  {}: {}", a.strategy, a.outcome);
            }
            s
        }
    };
    emit(cli, &report, &text)?;
    Ok(if verdict.is_unknown() { Outcome::Inconclusive } else { Outcome::Definitive })
}

fn kb(cli: &Cli, path: &Path, max_rules: usize, kb_max_len: usize, max_len: usize, rules_out: Option<&Path>) -> Result<Outcome> {
    let p = load_presentation(path)?;
    let budget = KbBudget { max_rules, max_len: kb_max_len, ..KbBudget::default() };
    let sys = knuth_bendix(&rules_from_presentation(&p), budget);
    if let Some(out) = rules_out {
        write(out, &sys.export_rules())?;
    }
    let counts = count_normal_forms(&sys, max_len).ok();
    let rules: Vec<String> = sys.rules().iter().map(|r| r.to_string()).collect();
    let report = json!({
        "schema": "burnside-kb/1",
        "config": { "presentation": p, "budget": budget, "max_len": max_len },
        "stats": sys.stats(),
        "confluent": sys.is_confluent(),
        "rules": rules,
        "normal_forms": counts,
    });
    let mut text = format!("{} rules, {:?}\n", sys.rule_count(), sys.stats().outcome);
    if let Some(c) = &counts {
        if c.stabilized {
            let _ = writeln!(text, "{} normal forms", c.total);
        } else {
            let _ = writeln!(text, "at least {} normal forms up to length {max_len}", c.total);
        }
    }
    emit(cli, &report, &text)?;
    Ok(if sys.is_confluent() { Outcome::Definitive } else { Outcome::Inconclusive })
}

fn abelian(cli: &Cli, path: &Path) -> Result<Outcome> {
    let p = load_presentation(path)?;
    let inv = abelian_invariants(&p);
    let report = json!({
        "schema": "burnside-abelian/1",
        "config": { "presentation": p },
        "torsion": inv.torsion.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "free_rank": inv.free_rank,
        "group": inv.to_string(),
    });
    emit(cli, &report, &format!("{inv}\n"))?;
    Ok(Outcome::Definitive)
}

fn realize_file(path: &Path, max_cosets: usize) -> Result<(Presentation, FiniteRealization)> {
    let p = load_presentation(path)?;
    let t = enumerate_cosets(&p, &[], max_cosets);
    let r = realize(&p, &t).map_err(|_| format!("{}: coset enumeration did not close within {max_cosets} cosets", path.display()))?;
    Ok((p, r))
}

fn load_group(path: &Path, max_cosets: usize) -> Result<(Value, FiniteGroupTable)> {
    let text = read(path)?;
    if text.trim_start().starts_with("g,") {
        let g = FiniteGroupTable::from_csv(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        return Ok((json!({ "table_order": g.order() }), g));
    }
    let (p, r) = realize_file(path, max_cosets)?;
    let g = FiniteGroupTable::from_realization(&r).map_err(|e| e.to_string())?;
    Ok((json!({ "presentation": p }), g))
}

fn embed(cli: &Cli, path: &Path, n: u64, r_max: usize, budget: u64, max_cosets: usize) -> Result<Outcome> {
    if n == 0 {
        return Err("n must be positive".into());
    }
    let (source, g) = load_group(path, max_cosets)?;
    let spec = DihedralProductSpec::new(n, 0);
    let outcome = embed_search(&g, spec, r_max, budget);
    let report = json!({
        "schema": "burnside-embed/1",
        "config": { "group": source, "n": n, "k": spec.k, "r_max": r_max, "budget": budget },
        "order": g.order(),
        "outcome": outcome,
    });
    let text = match &outcome {
        EmbedOutcome::Embedding(e) => format!("embeds with r = {} (factor orders {:?})\n", e.spec.copies, e.factor_orders),
        EmbedOutcome::NotFound { r_max } => format!("no embedding for any r <= {r_max} (exhaustive)\n"),
        EmbedOutcome::Refuted { reason } => format!("refuted: {reason}\n"),
        EmbedOutcome::BudgetExhausted { r_reached, .. } => format!("budget exhausted at r = {r_reached}\n"),
    };
    emit(cli, &report, &text)?;
    Ok(if matches!(outcome, EmbedOutcome::BudgetExhausted { .. }) { Outcome::Inconclusive } else { Outcome::Definitive })
}

fn center_cmd(cli: &Cli, path: &Path, max_cosets: usize) -> Result<Outcome> {
    let (p, r) = realize_file(path, max_cosets)?;
    let c = center(&r);
    let note = (c.order > 1).then(|| {
        format!(
            "small-n divergence: the center has order {}; free Burnside groups of large odd exponent have trivial center",
            c.order
        )
    });
    let report = json!({
        "schema": "burnside-center/1",
        "config": { "presentation": p, "max_cosets": max_cosets },
        "group_order": r.order(),
        "center": c,
        "note": note,
    });
    let reps: Vec<String> = c.representatives.iter().map(|w| w.to_string()).collect();
    let mut text = format!("center of order {} in a group of order {}: {}\n", c.order, r.order(), reps.join(" "));
    if let Some(n) = note {
        let _ = writeln!(text, "{n}");
    }
    emit(cli, &report, &text)?;
    Ok(Outcome::Definitive)
}

fn verify_cert(cli: &Cli, path: &Path) -> Result<Outcome> {
    let cert = Certificate::from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
    let result = verify_certificate(&cert);
    let report = json!({
        "schema": "burnside-verify-cert/1",
        "config": { "presentation": cert.presentation, "word": cert.word },
        "valid": result.is_ok(),
        "error": result.as_ref().err().map(|e| e.to_string()),
    });
    let text = match &result {
        Ok(()) => format!("valid: {} has infinite order\n", cert.word),
        Err(e) => format!("invalid: {e}\n"),
    };
    emit(cli, &report, &text)?;
    result.map(|_| Outcome::Definitive).map_err(|e| e.to_string())
}
