use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn qmlkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmlkit"))
        .args(args)
        .env_remove("QMLKIT_MAX_WORLDS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn temp_file(text: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(text.as_bytes()).unwrap();
    file
}

const ONE_WORLD: &str = r#"{"worlds":["w0"],"rq":[],"rm":[],"valuation":{"p":[]}}"#;
const CHAIN: &str =
    r#"{"worlds":["a","b","c"],"rq":[[0,1],[1,0],[1,2],[2,1]],"rm":[],"valuation":{"p":[0]}}"#;

#[test]
fn parse_prints_core_form() {
    let out = qmlkit(&["parse", "<>p"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "Not(Box(Not(Atom(p))))\n~[]~p\n");
    let out = qmlkit(&["parse", "p | q"]);
    assert_eq!(stdout(&out).lines().nth(1), Some("~(~p & ~q)"));
}

#[test]
fn parse_error_is_positioned() {
    let out = qmlkit(&["parse", "p & & q"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("token 3"), "{}", stderr(&out));
}

#[test]
fn eval_vacuous_box() {
    let model = temp_file(ONE_WORLD);
    let path = model.path().to_str().unwrap();
    let out = qmlkit(&["eval", "--model", path, "--world", "0", "--formula", "[]p"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "true\n"));
    let out = qmlkit(&["eval", "--model", path, "--world", "w0", "--formula", "p"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (1, "false\n"));
    let out = qmlkit(&["eval", "--model", path, "--world", "3", "--formula", "p"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn truthset_and_closedsets() {
    let model = temp_file(CHAIN);
    let path = model.path().to_str().unwrap();
    let out = qmlkit(&["truthset", "--model", path, "--formula", "~~p"]);
    assert_eq!(stdout(&out), "{0}\n");
    let out = qmlkit(&["truthset", "--model", path, "--formula", "~p"]);
    assert_eq!(stdout(&out), "{2}\n");
    let out = qmlkit(&["closedsets", "--model", path]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "{}\n{0}\n{2}\n{0, 1, 2}\n");
}

#[test]
fn validate_reports_violations() {
    let model = temp_file(CHAIN);
    let out = qmlkit(&["validate", "--model", model.path().to_str().unwrap()]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "ok\n"));
    let broken = temp_file(r#"{"worlds":["a","b"],"rq":[[0,1]],"rm":[]}"#);
    let out = qmlkit(&["validate", "--model", broken.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("symmetry"));
    let malformed = temp_file("{");
    let out = qmlkit(&["validate", "--model", malformed.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn countermodel_for_atoms() {
    let out = qmlkit(&["countermodel", "p |- q", "--max-worlds", "1"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("countermodel for q"));
    assert!(text.contains("p: {0}"));
    assert!(text.contains("q: {}"));
}

#[test]
fn countermodel_json() {
    let out = qmlkit(&["countermodel", "p |- q", "--max-worlds", "1", "--json"]);
    assert_eq!(code(&out), 1);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["format"], 1);
    assert_eq!(v["countermodels"]["q"]["witness_world"], 0);
    assert_eq!(
        v["countermodels"]["q"]["valuation"]["p"],
        serde_json::json!([0])
    );
}

#[test]
fn countermodel_budget_from_environment() {
    let goal = "p & (q | r) |- (p & q) | (p & r)";
    let out = qmlkit(&["countermodel", goal]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("worlds: 4"));
    let out = Command::new(env!("CARGO_BIN_EXE_qmlkit"))
        .args(["countermodel", goal])
        .env("QMLKIT_MAX_WORLDS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("no countermodel"));
}

#[test]
fn countermodel_random_mode() {
    let out = qmlkit(&[
        "countermodel",
        "p |- q",
        "--max-worlds",
        "6",
        "--random",
        "7,100",
    ]);
    assert_eq!(code(&out), 1);
    let again = qmlkit(&[
        "countermodel",
        "p |- q",
        "--max-worlds",
        "6",
        "--random",
        "7,100",
    ]);
    assert_eq!(stdout(&out), stdout(&again));
    let out = qmlkit(&["countermodel", "p |- q", "--random", "7"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn countermodel_budget_guard() {
    let out = qmlkit(&["countermodel", "p |- q", "--max-worlds", "9"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("exceeds"));
}

#[test]
fn prove_mem_and_unknown() {
    let out = qmlkit(&["prove", "|- []p, ~[]p", "--depth", "1"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("[MEM p]"));
    let out = qmlkit(&["prove", "p |- q", "--depth", "4"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).starts_with("unknown"));
    let out = qmlkit(&["prove", "p |- q", "--cut", "sometimes"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn proofs_round_trip_through_checkproof() {
    let out = qmlkit(&["prove", "p & q |- q & p", "--depth", "4", "--json"]);
    assert_eq!(code(&out), 0);
    let file = temp_file(&stdout(&out));
    let out = qmlkit(&["checkproof", file.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("ok: p & q |- q & p"));
}

#[test]
fn checkproof_reports_failing_node() {
    let bad = temp_file(
        r#"{"conclusion":{"left":["p"],"right":["q"]},"rule":{"name":"AX"},"premises":[]}"#,
    );
    let out = qmlkit(&["checkproof", bad.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("AX requires identical singleton sides"));
    let unknown = temp_file(r#"{"conclusion":{"left":[],"right":[]},"rule":{"name":"MP"}}"#);
    let out = qmlkit(&["checkproof", unknown.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn enumerate_counts() {
    let out = qmlkit(&["enumerate", "--worlds", "3", "--atoms", "1", "--count"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "n=1: 4\nn=2: 72\nn=3: 4976\ntotal: 5052\n");
    let out = qmlkit(&["enumerate", "--worlds", "1", "--atoms", "1"]);
    assert_eq!(stdout(&out).lines().count(), 4);
}

#[test]
fn soundness_suite_passes() {
    let out = qmlkit(&["soundness-suite", "--max-worlds", "3"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("0 failed, 12/12 rules covered"));
}

#[test]
fn output_is_stable() {
    let args = ["countermodel", "p & (q | r) |- (p & q) | (p & r)"];
    assert_eq!(stdout(&qmlkit(&args)), stdout(&qmlkit(&args)));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&qmlkit(&["frobnicate"])), 2);
    assert_eq!(code(&qmlkit(&["eval", "--world", "0"])), 2);
}
