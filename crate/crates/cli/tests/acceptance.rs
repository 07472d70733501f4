//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are run and reported like the others
//! but do not change the exit status. Long-running criteria run only when
//! `--include-ignored` is passed (`cargo test --test acceptance -- --include-ignored`)
//! or `BURNSIDE_ACCEPTANCE_LONG` is set.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use burnside::cosets::enumerate_cosets;
use burnside::dihedral::{embed_search, verify_embedding, DihedralProductSpec, EmbedOutcome, FiniteGroupTable};
use burnside::presentation::parse_presentation;
use burnside::rewrite::{count_normal_forms, knuth_bendix, rules_from_presentation, KbBudget};
use burnside::subgrp::{smith_normal_form, IntMatrix};
use burnside::tower::{final_realization, run_tower, TowerConfig};
use burnside::Generator;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Value;

/// Criteria whose failure is recorded rather than gating.
const KNOWN_FAILURES: &[&str] = &["7a", "9a"];

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

struct Run {
    code: i32,
    stdout: String,
    elapsed: Duration,
}

/// Every CLI invocation made by the suite, for the determinism rerun.
#[derive(Default)]
struct Log {
    calls: Vec<(Vec<String>, String)>,
}

impl Log {
    fn cli(&mut self, args: &[&str]) -> Run {
        let run = invoke(args);
        self.calls.push((args.iter().map(|s| s.to_string()).collect(), run.stdout.clone()));
        run
    }
}

fn invoke(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_burnside")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 output"),
        elapsed: start.elapsed(),
    }
}

fn json(run: &Run) -> Result<Value, String> {
    serde_json::from_str(&run.stdout).map_err(|e| format!("unparsable report: {e}"))
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().map(|a| a.iter().filter_map(|x| x.as_str().map(String::from)).collect()).unwrap_or_default()
}

fn check_tower(log: &mut Log, n: &str, periods: &[&str], order: u64, limit: Duration) -> Result<String, String> {
    let run = log.cli(&["tower", "-m", "2", "-n", n, "--jobs", "1"]);
    let r = json(&run)?;
    ensure(run.code == 0, format!("exit code {}", run.code))?;
    ensure(r["status"] == "TerminatedEqualsBurnside", format!("status {}", r["status"]))?;
    ensure(strings(&r["periods"]) == periods, format!("periods {}", r["periods"]))?;
    ensure(r["final_group"]["order"] == order, format!("order {}", r["final_group"]["order"]))?;
    ensure(r["final_group"]["exponent"].as_u64() == n.parse().ok(), format!("exponent {}", r["final_group"]["exponent"]))?;
    let orders = r["verification"]["period_orders"].as_array().ok_or("no period orders")?;
    ensure(orders.len() == periods.len() && orders.iter().all(|p| p["order"].as_u64() == n.parse().ok()), "a period order differs from n")?;
    ensure(run.elapsed < limit, format!("took {:?}, limit {:?}", run.elapsed, limit))?;
    Ok(format!("periods {periods:?}, order {order}, {:.2?}", run.elapsed))
}

fn c1(log: &mut Log) -> Result<String, String> {
    check_tower(log, "2", &["a", "b", "ab"], 4, Duration::from_secs(1))
}

fn c2(log: &mut Log) -> Result<String, String> {
    check_tower(log, "3", &["a", "b", "ab", "aB"], 27, Duration::from_secs(60))
}

fn c3(log: &mut Log) -> Result<String, String> {
    let mut detail = Vec::new();
    for n in ["2", "3"] {
        let r = json(&log.cli(&["tower", "-m", "2", "-n", n, "--jobs", "1"]))?;
        let ind = r["verification"]["independence"].as_array().ok_or("no independence records")?;
        ensure(ind.len() == strings(&r["periods"]).len(), format!("n={n}: {} records", ind.len()))?;
        ensure(r["verification"]["unresolved"] == 0, format!("n={n}: unresolved {}", r["verification"]["unresolved"]))?;
        ensure(ind.iter().all(|i| i["evidence"]["kind"] != "unresolved"), format!("n={n}: unresolved relator"))?;
        detail.push(format!("n={n}: {} relators independent", ind.len()));
    }
    Ok(detail.join(", "))
}

fn c4(log: &mut Log) -> Result<String, String> {
    let mut detail = Vec::new();
    for n in ["2", "3"] {
        let run = log.cli(&["tower", "-m", "2", "-n", n, "--jobs", "1", "--audit"]);
        let r = json(&run)?;
        ensure(run.code == 0, format!("n={n}: exit code {}", run.code))?;
        let a = &r["audit"];
        ensure(a["disagreements"].as_array().is_some_and(|d| d.is_empty()), format!("n={n}: {}", a["disagreements"]))?;
        ensure(a["finite_checked"].as_u64().unwrap_or(0) > 0, format!("n={n}: no finite verdict checked"))?;
        ensure(a["infinite_checked"].as_u64().unwrap_or(0) > 0, format!("n={n}: no certificate replayed"))?;
        detail.push(format!("n={n}: {} finite, {} infinite agree", a["finite_checked"], a["infinite_checked"]));
    }
    Ok(detail.join(", "))
}

fn c5(_: &mut Log) -> Result<String, String> {
    let mut detail = Vec::new();
    for (file, expected) in [("klein.txt", 4usize), ("b23.txt", 27)] {
        let p = parse_presentation(&std::fs::read_to_string(data(file)).unwrap()).map_err(|e| e.to_string())?;
        let sys = knuth_bendix(&rules_from_presentation(&p), KbBudget::default());
        ensure(sys.is_confluent(), format!("{file}: completion did not finish"))?;
        let count = count_normal_forms(&sys, 64).map_err(|e| e.to_string())?;
        ensure(count.stabilized && count.total == expected as u64, format!("{file}: {} normal forms", count.total))?;
        let table = enumerate_cosets(&p, &[], 10_000);
        ensure(table.index() == Some(expected), format!("{file}: index {:?}", table.index()))?;
        let mut nf_to_coset: HashMap<Vec<Generator>, usize> = HashMap::new();
        let mut coset_to_nf: HashMap<usize, Vec<Generator>> = HashMap::new();
        let mut words = vec![Vec::<Generator>::new()];
        let mut frontier = words.clone();
        for _ in 0..6 {
            frontier = frontier
                .iter()
                .flat_map(|w| (0..4).map(move |c| [w.as_slice(), &[Generator::from_code(c)]].concat()))
                .collect();
            words.extend(frontier.iter().cloned());
        }
        for w in &words {
            let nf = sys.reduce_letters(w);
            let coset = table.trace_letters(0, w);
            ensure(*nf_to_coset.entry(nf.clone()).or_insert(coset) == coset, format!("{file}: equal normal forms, different cosets"))?;
            ensure(*coset_to_nf.entry(coset).or_insert(nf.clone()) == nf, format!("{file}: equal cosets, different normal forms"))?;
        }
        detail.push(format!("{file}: {expected} normal forms, {} words agree", words.len()));
    }
    Ok(detail.join(", "))
}

fn c6(_: &mut Log) -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(6);
    let start = Instant::now();
    for i in 0..1000 {
        let (rows, cols) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let entries: Vec<Vec<i64>> = (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-9..=9)).collect()).collect();
        let m = IntMatrix::from_rows(cols, &entries);
        let sf = smith_normal_form(&m);
        ensure(sf.u.mul(&m).mul(&sf.v) == sf.s, format!("matrix {i}: U*M*V != S"))?;
        ensure(sf.s.is_diagonal(), format!("matrix {i}: S not diagonal"))?;
        let d = sf.s.diagonal();
        let chain = d.windows(2).all(|p| if p[0].is_zero() { p[1].is_zero() } else { p[1].is_multiple_of(&p[0]) });
        ensure(chain && d.iter().all(|x| !x.is_negative()), format!("matrix {i}: divisibility chain broken"))?;
        ensure(sf.u.determinant().abs().is_one() && sf.v.determinant().abs().is_one(), format!("matrix {i}: not unimodular"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("1000 matrices in {elapsed:.2?}"))
}

fn realized_tower_group(n: u64) -> Result<FiniteGroupTable, String> {
    let report = run_tower(TowerConfig::new(2, n), 1).map_err(|e| e.to_string())?;
    let r = final_realization(&report).ok_or("tower did not terminate")?;
    FiniteGroupTable::from_realization(&r).map_err(|e| e.to_string())
}

fn c7a(_: &mut Log) -> Result<String, String> {
    let g = realized_tower_group(3)?;
    ensure(g.order() == 27, format!("order {}", g.order()))?;
    let subgroups = g.all_subgroups();
    let non_cyclic: Vec<usize> = subgroups.iter().filter(|s| !g.is_cyclic_subgroup(s)).map(|s| s.len()).collect();
    ensure(
        non_cyclic.is_empty(),
        format!("{} of {} subgroups are not cyclic (orders {:?})", non_cyclic.len(), subgroups.len(), non_cyclic),
    )?;
    Ok(format!("all {} subgroups cyclic", subgroups.len()))
}

fn c7b(_: &mut Log) -> Result<String, String> {
    let g = realized_tower_group(2)?;
    let mut rng = StdRng::seed_from_u64(7);
    let samples = 40;
    let mut max_r = 0;
    for _ in 0..samples {
        let k = rng.gen_range(2..=3);
        let gens: Vec<usize> = (0..k).map(|_| rng.gen_range(0..g.order())).collect();
        let elems = g.generated_subgroup(&gens);
        let h = g.subgroup_table(&elems).map_err(|e| e.to_string())?;
        match embed_search(&h, DihedralProductSpec::new(2, 0), 4, 10_000_000) {
            EmbedOutcome::Embedding(e) => {
                ensure(verify_embedding(&h, &e), "embedding failed re-verification")?;
                max_r = max_r.max(e.spec.copies);
            }
            other => return Err(format!("subgroup generated by {gens:?}: {other:?}")),
        }
    }
    Ok(format!("{samples} sampled subgroups embed, r <= {max_r}"))
}

fn c7c(log: &mut Log) -> Result<String, String> {
    let run = log.cli(&["embed", &data("q8.txt"), "-n", "4", "--r-max", "3"]);
    let r = json(&run)?;
    ensure(run.code == 0, format!("exit code {}", run.code))?;
    ensure(r["order"] == 8, format!("order {}", r["order"]))?;
    let q8 = FiniteGroupTable::quaternion();
    ensure(q8.order_spectrum().get(&2) == Some(&1) && !q8.is_abelian(), "reference Q8 malformed")?;
    let result = r["outcome"]["result"].as_str().unwrap_or("");
    ensure(matches!(result, "not_found" | "refuted"), format!("outcome {}", r["outcome"]))?;
    Ok(format!("Q8 {result} for r <= 3"))
}

fn c8(log: &mut Log) -> Result<String, String> {
    let run = log.cli(&["center", &data("b23.txt")]);
    let r = json(&run)?;
    ensure(run.code == 0, format!("exit code {}", run.code))?;
    ensure(r["group_order"] == 27, format!("group order {}", r["group_order"]))?;
    ensure(r["center"]["order"] == 3, format!("center order {}", r["center"]["order"]))?;
    ensure(r["note"].as_str().is_some_and(|s| s.contains("small-n divergence")), "divergence label missing")?;
    Ok("center of order 3, labeled as a small-n divergence".into())
}

fn c9a(log: &mut Log) -> Result<String, String> {
    let run = log.cli(&["tower", "-m", "2", "-n", "4", "--jobs", "1"]);
    let r = json(&run)?;
    let status = r["status"].as_str().unwrap_or("");
    match status {
        "TerminatedEqualsBurnside" => {
            ensure(r["final_group"]["order"] == 4096, format!("order {}", r["final_group"]["order"]))?;
            let orders = r["verification"]["period_orders"].as_array().ok_or("no period orders")?;
            ensure(orders.iter().all(|p| p["order"] == 4), "a period order differs from 4")?;
            Ok(format!("terminated at order 4096 in {:.1?}", run.elapsed))
        }
        "OracleInconclusive" => {
            ensure(run.code == 2, format!("exit code {}", run.code))?;
            Ok(format!("checkpointed as inconclusive at rank {}", r["inconclusive"]["rank"]))
        }
        _ => Err(format!(
            "status {status} with periods {:?}, order {}, exponent {} (witness {})",
            strings(&r["periods"]),
            r["final_group"]["order"],
            r["final_group"]["exponent"],
            r["final_group"]["exponent_check"]["witness"]
        )),
    }
}

fn c9b(log: &mut Log) -> Result<String, String> {
    let run = log.cli(&["coset", &data("b24.txt")]);
    let r = json(&run)?;
    ensure(run.code == 0, format!("exit code {}", run.code))?;
    ensure(r["index"] == 4096, format!("index {}", r["index"]))?;
    Ok(format!("B(2,4) power presentation closes at 4096 in {:.2?}", run.elapsed))
}

fn c10(log: &mut Log) -> Result<String, String> {
    let calls = std::mem::take(&mut log.calls);
    for (args, stdout) in &calls {
        let rerun: Vec<&str> = args
            .iter()
            .enumerate()
            .map(|(i, a)| if i > 0 && args[i - 1] == "--jobs" { "8" } else { a.as_str() })
            .collect();
        let again = invoke(&rerun);
        ensure(&again.stdout == stdout, format!("`{}` differs between runs", rerun.join(" ")))?;
    }
    let g1 = format!("{:?}", realized_tower_group(3)?.to_csv());
    let g2 = format!("{:?}", realized_tower_group(3)?.to_csv());
    ensure(g1 == g2, "realized order-27 table differs between runs")?;
    let jobs1 = run_tower(TowerConfig::new(2, 3), 1).map_err(|e| e.to_string())?.to_json();
    let jobs8 = run_tower(TowerConfig::new(2, 3), 8).map_err(|e| e.to_string())?.to_json();
    ensure(jobs1 == jobs8, "library tower report differs between 1 and 8 threads")?;
    Ok(format!("{} reports byte-identical with --jobs 1 and --jobs 8", calls.len() + 1))
}

type Criterion = (&'static str, &'static str, bool, fn(&mut Log) -> Result<String, String>);

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let long = args.iter().any(|a| a == "--include-ignored" || a == "--ignored")
        || std::env::var_os("BURNSIDE_ACCEPTANCE_LONG").is_some();
    let criteria: &[Criterion] = &[
        ("1", "tower n=2", false, c1),
        ("2", "tower n=3", false, c2),
        ("3", "independence of tower relators", false, c3),
        ("4", "oracle soundness audit", false, c4),
        ("5", "Knuth-Bendix normal forms", false, c5),
        ("6", "Smith normal form", false, c6),
        ("7a", "subgroups of the order-27 group are cyclic", false, c7a),
        ("7b", "sampled B(2,2) subgroups embed in dihedral products", false, c7b),
        ("7c", "Q8 has no embedding for r <= 3", false, c7c),
        ("8", "center of B(2,3)", false, c8),
        ("9a", "tower n=4", true, c9a),
        ("9b", "B(2,4) coset cross-check", false, c9b),
        ("10", "determinism across thread counts", false, c10),
    ];
    let mut log = Log::default();
    let mut unexpected = 0;
    for (id, title, is_long, check) in criteria {
        let known = KNOWN_FAILURES.contains(id);
        if *is_long && !long {
            println!("SKIP criterion {id}: {title} (long-running; pass --include-ignored)");
            continue;
        }
        match check(&mut log) {
            Ok(detail) => println!("PASS criterion {id}: {title}: {detail}"),
            Err(why) => {
                let tag = if known { " [known failure]" } else { "" };
                println!("FAIL criterion {id}: {title}: {why}{tag}");
                if !known {
                    unexpected += 1;
                }
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
