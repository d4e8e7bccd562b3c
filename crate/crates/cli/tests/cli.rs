use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sperner"))
        .args(args)
        .env_remove("SPERNER_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = run(&all);
    let doc: Value = serde_json::from_slice(&out.stdout).expect("one JSON document");
    assert_eq!(doc["schema"], 1);
    (doc, out.status.code().unwrap())
}

fn family_file(lines: &[&str]) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "# test family").unwrap();
    for l in lines {
        writeln!(f, "{l}").unwrap();
    }
    f
}

#[test]
fn bound_reports_value_and_rule() {
    let (doc, code) = json(&["bound", "--kind", "diff-sperner", "--q", "4", "--L", "1..3", "--n", "6"]);
    assert_eq!(code, 0);
    assert_eq!(doc["status"], "ok");
    assert_eq!(doc["payload"]["bound"], 26);
    assert_eq!(doc["payload"]["theorem_id"], "R5");
}

#[test]
fn mu_prints_plain_value() {
    let out = run(&["mu", "--q", "9", "--s", "1"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "3");
}

#[test]
fn search_close_singletons() {
    let (doc, code) = json(&["search", "--kind", "close-sperner", "--L", "1", "--n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(doc["payload"]["max_size"], 3);
    assert_eq!(doc["payload"]["exact"], true);
    let members = doc["payload"]["witness"]["members"].as_array().unwrap();
    assert_eq!(members, &vec![serde_json::json!([1]), serde_json::json!([2]), serde_json::json!([3])]);
}

#[test]
fn budget_exhaustion_exits_three() {
    let (doc, code) = json(&["search", "--kind", "antichain", "--n", "8", "--budget", "5"]);
    assert_eq!(code, 3);
    assert_eq!(doc["status"], "budget-exhausted");
    let out = Command::new(env!("CARGO_BIN_EXE_sperner"))
        .args(["search", "--kind", "antichain", "--n", "8"])
        .env("SPERNER_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["mu", "--q", "6", "--s", "1"],
        vec!["bound", "--kind", "diff", "--q", "4", "--L", "3..1", "--n", "5"],
        vec!["bound", "--kind", "nonsense", "--n", "5"],
        vec!["mu", "--q", "9", "--s", "1", "--frobnicate"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
    let (doc, code) = json(&["bound", "--kind", "diff", "--q", "12", "--L", "1", "--n", "4"]);
    assert_eq!(code, 2);
    assert_eq!(doc["status"], "error");
    assert!(doc["payload"]["message"].as_str().unwrap().contains("prime power"));
}

#[test]
fn check_reports_violation_as_infeasible() {
    let f = family_file(&["{1}", "{1,2}"]);
    let path = f.path().to_str().unwrap();
    let (doc, code) = json(&["check", "--kind", "diff", "--file", path, "--q", "3", "--L", "1,2"]);
    assert_eq!(code, 0);
    assert_eq!(doc["status"], "infeasible");
    assert_eq!(doc["payload"]["satisfied"], false);
    let good = family_file(&["{1}", "{2}", "{3}"]);
    let (doc, _) = json(&["check", "--kind", "diff", "--file", good.path().to_str().unwrap(), "--q", "2", "--L", "1"]);
    assert_eq!(doc["payload"]["satisfied"], true);
}

#[test]
fn push_moves_into_band() {
    let f = family_file(&["{1}", "{2,3,4}"]);
    let (doc, code) = json(&["push", "--file", f.path().to_str().unwrap(), "--s", "2"]);
    assert_eq!(code, 0);
    for m in doc["payload"]["output"]["members"].as_array().unwrap() {
        assert_eq!(m.as_array().unwrap().len(), 2);
    }
}

#[test]
fn verify_full_rank_and_broken_pattern() {
    let f = family_file(&["{1}", "{2}", "{3}", "{4}"]);
    let (doc, _) = json(&["verify", "--kind", "diff", "--file", f.path().to_str().unwrap(), "--q", "2", "--L", "1"]);
    assert_eq!(doc["status"], "ok");
    assert_eq!(doc["payload"]["report"]["rank"], 5);
    let bad = family_file(&["{1}", "{1,2}"]);
    let (doc, _) =
        json(&["verify", "--kind", "diff", "--file", bad.path().to_str().unwrap(), "--n", "3", "--q", "3", "--L", "1,2"]);
    assert_eq!(doc["status"], "infeasible");
    assert_eq!(doc["payload"]["report"]["pattern"]["holds"], false);
    assert!(!doc["diagnostics"].as_array().unwrap().is_empty());
}

#[test]
fn verify_midband_sym() {
    let f = family_file(&["{1,2}", "{1,3}", "{1,4}", "{2,3}", "{2,4}", "{3,4}"]);
    let (doc, _) = json(&["verify", "--kind", "diff", "--file", f.path().to_str().unwrap(), "--L", "1..2", "--variant", "sym"]);
    assert_eq!(doc["status"], "ok");
    assert_eq!(doc["payload"]["report"]["total"], 11);
}

#[test]
fn table_rows_respect_bounds() {
    let (doc, code) = json(&["table", "--kind", "diff", "--q", "4", "--n", "5"]);
    assert_eq!(code, 0);
    let rows = doc["payload"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r["brute_force"].as_u64().unwrap() <= r["bound"].as_u64().unwrap());
    }
}

#[test]
fn number_theory_commands() {
    let (doc, _) = json(&["vp", "--p", "3", "--n", "-54"]);
    assert_eq!(doc["payload"]["valuation"], 3);
    let (doc, _) = json(&["vp", "--p", "2", "--n", "0"]);
    assert_eq!(doc["payload"]["valuation"], "inf");
    let (doc, _) = json(&["binom", "--p", "2", "--x", "6", "--y", "3"]);
    assert_eq!(doc["payload"]["binomial"], 20);
    assert_eq!(doc["payload"]["valuation"], 2);
    let (doc, _) = json(&["digits", "--q", "27", "--s", "5"]);
    assert_eq!(doc["payload"]["digits"], serde_json::json!([0, 1, 2]));
    let (doc, _) = json(&["census", "--q", "4"]);
    assert_eq!(doc["payload"]["closed_form"], 5);
    let (doc, _) = json(&["closure", "--q", "9", "--lo", "3", "--hi", "3"]);
    assert_eq!(doc["payload"]["closure"]["length"], 3);
}

#[test]
fn seppoly_check_and_find() {
    let (doc, code) = json(&["seppoly", "check", "--q", "4", "--L", "1..3", "--roots", "1,2,3"]);
    assert_eq!(code, 0);
    assert_eq!(doc["payload"]["separates"], true);
    let (doc, _) = json(&["seppoly", "check", "--q", "4", "--L", "1..3", "--roots", "1"]);
    assert_eq!(doc["status"], "infeasible");
    let (doc, _) = json(&["seppoly", "find", "--q", "9", "--L", "1,2", "--max-degree", "3"]);
    assert_eq!(doc["payload"]["degree"], 2);
    let (doc, _) = json(&["seppoly", "find", "--q", "9", "--L", "1..5", "--max-degree", "1"]);
    assert_eq!(doc["status"], "infeasible");
    let (doc, _) = json(&["seppoly", "find", "--q", "4", "--L", "1..3", "--max-degree", "3"]);
    assert_eq!(doc["payload"]["degree"], 3);
}

#[test]
fn wrap_intervals_for_intersecting() {
    let (doc, code) = json(&["bound", "--kind", "intersecting", "--q", "9", "--L", "8..0@wrap", "--n", "8"]);
    assert_eq!(code, 0);
    assert_eq!(doc["payload"]["spec"]["L"], serde_json::json!([0, 8]));
}

#[test]
fn output_is_deterministic() {
    let args = ["--json", "search", "--kind", "diff", "--q", "3", "--L", "1,2", "--n", "5"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}
