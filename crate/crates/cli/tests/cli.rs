use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn burnside(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_burnside"))
        .args(args)
        .env_remove("BURNSIDE_MAX_COSETS")
        .env_remove("BURNSIDE_KB_MAX_RULES")
        .env_remove("BURNSIDE_JOBS")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn temp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("burnside-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn coset_closes_on_klein_four() {
    let out = burnside(&["coset", &data("klein.txt")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["index"], 4);
    assert_eq!(r["schema"], "burnside-coset/1");
    assert_eq!(r["config"]["presentation"], "gens 2\nrel aa\nrel bb\nrel abab\n");
}

#[test]
fn coset_on_cyclic_group() {
    let out = burnside(&["--format", "text", "coset", &data("c5.txt")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "index 5\n");
}

#[test]
fn coset_exhaustion_is_a_status() {
    let out = burnside(&["coset", &data("dinf.txt"), "--max-cosets", "500"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["status"]["status"], "exhausted");
    assert_eq!(r["index"], Value::Null);
}

#[test]
fn coset_budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_burnside"))
        .args(["coset", &data("dinf.txt")])
        .env("BURNSIDE_MAX_COSETS", "300")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["config"]["max_cosets"], 300);
}

#[test]
fn coset_of_subgroup_and_csv() {
    let csv = temp_path("klein.csv");
    let out = burnside(&["coset", &data("klein.txt"), "--subgroup", "a", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["index"], 2);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn order_infinite_writes_checkable_certificate() {
    let cert = temp_path("triangle.json");
    let out = burnside(&["order", &data("triangle333.txt"), "aB", "--certificate", cert.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["verdict"]["verdict"], "infinite");
    let check = burnside(&["verify-cert", cert.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
    assert_eq!(report(&check)["valid"], true);
}

#[test]
fn tampered_certificate_is_rejected() {
    let cert = temp_path("tampered.json");
    burnside(&["order", &data("triangle333.txt"), "aB", "--certificate", cert.to_str().unwrap()]);
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    v["word"] = Value::from("ab");
    std::fs::write(&cert, v.to_string()).unwrap();
    let check = burnside(&["verify-cert", cert.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(1));
    assert_eq!(report(&check)["valid"], false);
}

#[test]
fn order_finite() {
    let out = burnside(&["--format", "text", "order", &data("triangle333.txt"), "ab", "--n-hint", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ab has order 3\n");
}

#[test]
fn order_of_empty_word_is_an_error() {
    let out = burnside(&["order", &data("klein.txt"), "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("word must be nonempty"));
}

#[test]
fn order_rejects_generators_beyond_rank() {
    let out = burnside(&["order", &data("c5.txt"), "ab"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn kb_counts_klein_normal_forms() {
    let rules = temp_path("klein.rules");
    let out = burnside(&["kb", &data("klein.txt"), "--rules", rules.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["confluent"], true);
    assert_eq!(r["normal_forms"]["total"], 4);
    assert!(std::fs::read_to_string(&rules).unwrap().contains("->"));
}

#[test]
fn abelian_invariants_of_triangle_group() {
    let r = report(&burnside(&["abelian", &data("triangle333.txt")]));
    assert_eq!(r["torsion"], serde_json::json!(["3", "3"]));
    assert_eq!(r["free_rank"], 0);
    let out = burnside(&["--format", "text", "abelian", &data("dinf.txt")]);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "Z/2 x Z/2\n");
}

#[test]
fn embed_accepts_csv_tables() {
    let csv = temp_path("c4.csv");
    std::fs::write(&csv, "g,0,1,2,3\n0,0,1,2,3\n1,1,2,3,0\n2,2,3,0,1\n3,3,0,1,2\n").unwrap();
    let out = burnside(&["embed", csv.to_str().unwrap(), "-n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["outcome"]["result"], "embedding");
}

#[test]
fn embed_quaternion_fails() {
    let out = burnside(&["embed", &data("q8.txt"), "-n", "4", "--r-max", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["outcome"]["result"], "not_found");
}

#[test]
fn center_labels_small_n_divergence() {
    let out = burnside(&["--format", "text", "center", &data("b23.txt")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("center of order 3 in a group of order 27"));
    assert!(text.contains("small-n divergence"));
}

#[test]
fn tower_writes_report_and_resumes() {
    let checkpoint = temp_path("checkpoint.json");
    let out = burnside(&["tower", "-m", "2", "-n", "3", "--max-candidates", "3", "--out", checkpoint.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read(&checkpoint).unwrap(), out.stdout);
    assert_eq!(report(&out)["status"], "OracleInconclusive");

    let resumed = burnside(&["tower", "-m", "2", "-n", "3", "--resume", checkpoint.to_str().unwrap()]);
    assert_eq!(resumed.status.code(), Some(0));
    let fresh = burnside(&["tower", "-m", "2", "-n", "3"]);
    assert_eq!(resumed.stdout, fresh.stdout);

    let wrong = burnside(&["tower", "-m", "2", "-n", "2", "--resume", checkpoint.to_str().unwrap()]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn tower_trivial_exponent() {
    let out = burnside(&["tower", "-m", "2", "-n", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["periods"], serde_json::json!(["a", "b"]));
    assert_eq!(r["final_group"]["order"], 1);
}

#[test]
fn huge_exponent_prints_notice_and_stops() {
    let out = burnside(&["tower", "-m", "2", "-n", "281474976710656"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("never terminates"));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(burnside(&["--help"]).status.code(), Some(0));
    assert_eq!(burnside(&["--version"]).status.code(), Some(0));
    assert_eq!(burnside(&["tower", "-m", "2"]).status.code(), Some(1));
    assert_eq!(burnside(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(burnside(&["coset", "/nonexistent/file.txt"]).status.code(), Some(1));
}
