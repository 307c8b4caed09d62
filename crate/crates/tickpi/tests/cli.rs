//! End-to-end tests of the `tickpi` binary: exit codes, JSON report shapes,
//! and the canon/erase printers.

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn tickpi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tickpi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("tickpi-test-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is valid JSON")
}

#[test]
fn check_accepts_the_corpus_and_reports_json() {
    for mode in ["span", "work", "io"] {
        let out = tickpi(&[
            "check",
            corpus("mergesort.pi").to_str().unwrap(),
            "--mode",
            mode,
            "--json",
        ]);
        assert_eq!(out.status.code(), Some(0), "mergesort checks under {mode}");
        let v = stdout_json(&out);
        assert_eq!(v["mode"], mode);
        assert_eq!(v["ok"], true);
        let items = v["items"].as_array().unwrap();
        assert!(!items.is_empty());
        for item in items {
            assert_eq!(item["ok"], true, "{}", item["name"]);
        }
    }
}

#[test]
fn check_rejects_wrong_bounds_with_a_witness() {
    let out = tickpi(&[
        "check",
        corpus("merge_wrong_bound.pi").to_str().unwrap(),
        "--mode",
        "span",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["ok"], false);
    let failing: Vec<_> = v["items"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|i| i["ok"] == false)
        .collect();
    assert!(!failing.is_empty());
    assert!(
        failing
            .iter()
            .any(|i| i["detail"].as_str().unwrap().contains("fails at")),
        "the failure report names a concrete counterexample valuation"
    );
}

#[test]
fn parse_errors_exit_2() {
    let bad = temp_file("garbage.pi", "this is ) not ( a process");
    let out = tickpi(&["check", bad.to_str().unwrap(), "--mode", "span"]);
    assert_eq!(out.status.code(), Some(2));
    let out = tickpi(&["run", bad.to_str().unwrap(), "--mode", "span"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_bind_exits_2() {
    let out = tickpi(&[
        "run",
        corpus("mergesort.pi").to_str().unwrap(),
        "--mode",
        "span",
        "--bind",
        "nosuch=[1]",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_reports_span_within_the_documented_bound() {
    let out = tickpi(&[
        "run",
        corpus("mergesort.pi").to_str().unwrap(),
        "--mode",
        "span",
        "--bind",
        "l=[4, 6, 7, 2]",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["terminated"], true);
    assert!(v["span"].as_u64().unwrap() <= 8);
    assert!(v["final"].as_str().unwrap().contains("[2, 4, 6, 7]"));
}

#[test]
fn run_on_the_empty_program_costs_nothing() {
    let out = tickpi(&[
        "run",
        corpus("empty.pi").to_str().unwrap(),
        "--mode",
        "work",
        "--policy",
        "deterministic",
        "--max-steps",
        "10",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["work"], 0);
    assert_eq!(v["terminated"], true);
}

#[test]
fn exhaustive_run_reports_the_span_envelope() {
    let race = temp_file("race.pi.txt", "a().tick.0 | a<> | tick.0");
    let out = tickpi(&[
        "run",
        race.to_str().unwrap(),
        "--mode",
        "span",
        "--policy",
        "exhaustive:1000",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!(v["minSpan"].as_u64().is_some());
    assert!(v["maxSpan"].as_u64().is_some());
    assert!(v["schedulesExplored"].as_u64().unwrap() >= 1);
    assert!(v["minSpan"].as_u64() <= v["maxSpan"].as_u64());
}

#[test]
fn exhausted_step_budget_exits_3() {
    let out = tickpi(&[
        "run",
        corpus("race.pi").to_str().unwrap(),
        "--mode",
        "span",
        "--max-steps",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn erase_removes_every_tick() {
    let p = temp_file("erase.pi.txt", "tick.0");
    let out = tickpi(&["erase", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0");
}

#[test]
fn canon_drops_inert_components_and_is_idempotent() {
    let p = temp_file("canon.pi.txt", "a<> | 0");
    let out = tickpi(&["canon", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let once = String::from_utf8_lossy(&out.stdout).trim().to_string();
    assert_eq!(once, "a<>");

    let p2 = temp_file("canon2.pi.txt", &once);
    let out2 = tickpi(&["canon", p2.to_str().unwrap()]);
    let twice = String::from_utf8_lossy(&out2.stdout).trim().to_string();
    assert_eq!(once, twice, "canonicalization is idempotent");
}

#[test]
fn run_rejects_io_mode() {
    let out = tickpi(&[
        "run",
        corpus("empty.pi").to_str().unwrap(),
        "--mode",
        "io",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
