//! End-to-end runs of the binary. Golden files live in `tests/golden`; set
//! `GOLDEN_UPDATE=1` to rewrite them after an intended output change.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use contlogic::io::{read_structure, SCHEMA_VERSION};
use serde_json::Value;

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn contlogic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contlogic"))
        .args(args)
        .current_dir(crate_dir())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

fn golden(name: &str, actual: &str) {
    let path = crate_dir().join("tests/golden").join(name);
    if std::env::var_os("GOLDEN_UPDATE").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

fn json(o: &Output) -> Value {
    let v: Value = serde_json::from_str(&stdout(o)).expect("stdout is one json document");
    assert_eq!(v["schema_version"], SCHEMA_VERSION);
    v
}

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn eval_prints_the_running_value() {
    let o = contlogic(&["eval", "--structure", "tests/data/m.json", "--formula", "sup x. P(x)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0.8\n");
}

#[test]
fn eval_tables_over_free_variables() {
    let o = contlogic(&[
        "eval",
        "--structure",
        "tests/data/m.json",
        "--formula",
        "P(x)",
        "--formula",
        "Q x. P(x)",
        "--bounds",
    ]);
    assert_eq!(o.status.code(), Some(0));
    golden("eval_table.txt", &stdout(&o));
    let o = contlogic(&[
        "--json",
        "eval",
        "--structure",
        "tests/data/m.json",
        "--formula",
        "P(x)",
        "--formula",
        "Q x. P(x)",
    ]);
    assert_eq!(o.status.code(), Some(0));
    json(&o);
    golden("eval_table.json", &stdout(&o));
}

#[test]
fn eval_respects_fixed_assignments() {
    let o = contlogic(&[
        "eval",
        "--structure",
        "tests/data/m.json",
        "--formula",
        "P(x)",
        "--assign",
        "x=b",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x=b\t0.8\n");
    let o = contlogic(&[
        "eval",
        "--structure",
        "tests/data/m.json",
        "--formula",
        "P(x)",
        "--assign",
        "x=z",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_reports_types() {
    let o = contlogic(&[
        "--json",
        "parse",
        "--structure",
        "tests/data/m.json",
        "--formula",
        "Q x. P(x)",
        "--formula",
        "max(P(x), P(y))",
    ]);
    assert_eq!(o.status.code(), Some(0));
    golden("parse.json", &stdout(&o));
}

#[test]
fn parse_errors_carry_columns() {
    let o = contlogic(&["parse", "--structure", "tests/data/m.json", "--formula", "P(x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("column 4"), "{}", stderr(&o));
}

#[test]
fn malformed_files_report_positions() {
    let o = contlogic(&["eval", "--structure", "tests/data/garbled.json", "--formula", "P(x)"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3, column"), "{}", stderr(&o));
    let o = contlogic(&[
        "--json",
        "eval",
        "--structure",
        "tests/data/missing.json",
        "--formula",
        "P(x)",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(json(&o)["error"].as_str().unwrap().contains("missing.json"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(contlogic(&["bogus"]).status.code(), Some(2));
    assert_eq!(contlogic(&["fuzz"]).status.code(), Some(2));
    assert_eq!(contlogic(&["eval", "--formula", "P(x)"]).status.code(), Some(2));
    let help = contlogic(&["translate", "--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("--grid-step"));
}

#[test]
fn translate_manifest() {
    let o = contlogic(&[
        "--json",
        "translate",
        "--structure",
        "tests/data/m.json",
        "--grid-step",
        "1/10",
        "--formula",
        "Q x. P(x)",
        "--theta",
        "hsup",
        "--verify",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["formulas"][0]["code"]["formula"], "sup x. P_0(x)");
    assert_eq!(v["symbols"]["P"]["targets"][0], "P_0");
    golden("translate.json", &stdout(&o));
}

#[test]
fn translate_then_check_t0_round_trips() {
    let coded = tmp("coded.json");
    let decoded = tmp("decoded.json");
    let o = contlogic(&[
        "translate",
        "--structure",
        "tests/data/m.json",
        "--grid-step",
        "1/10",
        "--emit-structure",
        coded.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = contlogic(&[
        "check-t0",
        "--structure",
        coded.to_str().unwrap(),
        "--tol",
        "0",
        "--decode",
        decoded.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let original = std::fs::read_to_string(crate_dir().join("tests/data/m.json")).unwrap();
    let (m, _) = read_structure(&original, "m.json").unwrap();
    let (back, _) = read_structure(&std::fs::read_to_string(&decoded).unwrap(), "decoded.json").unwrap();
    assert_eq!(back.interp(), m.interp());
    assert_eq!(back.universe(), m.universe());
}

#[test]
fn check_t0_reports_the_failing_tuple() {
    let o = contlogic(&["check-t0", "--structure", "tests/data/bad.json", "--tol", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("P(a)"));
    let o = contlogic(&[
        "--json",
        "check-t0",
        "--structure",
        "tests/data/bad.json",
        "--tol",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["witness"]["tuple"], "a");
    assert_eq!(v["witness"]["distance"], "1");
    golden("check_t0_bad.json", &stdout(&o));
}

#[test]
fn check_metric_finds_modulus_violation() {
    let o = contlogic(&["--json", "check-metric", "--structure", "tests/data/metric_bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    golden("check_metric_bad.json", &stdout(&o));
    let o = contlogic(&["check-metric", "--structure", "tests/data/collapse.json"]);
    assert_eq!(o.status.code(), Some(0));
    let o = contlogic(&["check-metric", "--structure", "tests/data/m.json"]);
    assert_eq!(o.status.code(), Some(2), "no distance symbol is an input error");
}

#[test]
fn quotient_collapses_zero_distance_pairs() {
    let o = contlogic(&["--json", "quotient", "--structure", "tests/data/collapse.json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["classes"].as_array().unwrap().len(), 2);
    golden("quotient.json", &stdout(&o));
    let o = contlogic(&["quotient", "--structure", "tests/data/metric_bad.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn encode_fn_adds_a_relation() {
    let out = tmp("encoded.json");
    let o = contlogic(&[
        "--json",
        "encode-fn",
        "--structure",
        "tests/data/collapse.json",
        "--function",
        "tests/data/f.json",
        "--name",
        "F",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    golden("encode_fn.json", &stdout(&o));
    let o = contlogic(&[
        "encode-fn",
        "--structure",
        "tests/data/collapse.json",
        "--function",
        "tests/data/f.json",
        "--name",
        "F",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (m, _) = read_structure(&std::fs::read_to_string(&out).unwrap(), "encoded.json").unwrap();
    assert_eq!(m.signature().relation("F").unwrap().arity, 2);
    let o = contlogic(&[
        "encode-fn",
        "--structure",
        "tests/data/collapse.json",
        "--function",
        "tests/data/f_bad.json",
        "--name",
        "F",
    ]);
    assert_eq!(o.status.code(), Some(1), "f separates the zero-distance pair a, b");
}

#[test]
fn fuzz_is_reproducible() {
    let args = ["--json", "fuzz", "--seed", "0", "--trials", "20"];
    let a = contlogic(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&contlogic(&args)));
    golden("fuzz_seed0.jsonl", &stdout(&a));
}

#[test]
fn fuzz_five_hundred_trials_pass() {
    let o = contlogic(&["fuzz", "--seed", "0", "--trials", "500"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 501);
    assert!(lines[..500].iter().all(|r| r["outcome"] == "pass"));
    assert_eq!(lines[500]["summary"]["failures"], 0);
}
