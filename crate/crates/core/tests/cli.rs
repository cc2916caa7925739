use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn cjl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cjl")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn eval_reports_truth_value() {
    let o = cjl(&["eval", "--model", &fixture("gettier.json"), "--state", "w", "(p|q) & (c.x):(p|q)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "true");
    let o = cjl(&["eval", "--model", &fixture("gettier.json"), "--state", "w", "~(p|q) > ~(c.x):(p|q)"]);
    assert_eq!(stdout(&o).trim(), "false");
}

#[test]
fn eval_without_state_prints_truth_set() {
    let o = cjl(&["eval", "--model", &fixture("gettier.json"), "p|q"]);
    assert_eq!(stdout(&o).trim(), "{w}");
}

#[test]
fn prove_open_emits_countermodel_json() {
    let o = cjl(&["prove", "--format", "json", "(p & ~p) ~> q"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "OPEN");
    assert_eq!(v["root"], "w0");
    assert_eq!(v["model"]["states"].as_array().unwrap().len(), 3);
}

#[test]
fn prove_closed_and_sequent_syntax() {
    let o = cjl(&["prove", "p ; p ~> q |- q"]);
    assert!(stdout(&o).starts_with("CLOSED"));
    let o = cjl(&["prove", "s:p ~> (s+t):p"]);
    assert!(stdout(&o).contains("9. p, +2  [T: 3,7]"));
}

#[test]
fn exhaustion_exits_with_three() {
    let o = cjl(&["prove", "--budget-steps", "2", "p ~> (q ~> p)"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("EXHAUSTED"));
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(cjl(&["parse", "p ~> q"]).status.code(), Some(2));
    assert_eq!(cjl(&["parse", "p & (q"]).status.code(), Some(2));
    assert_eq!(cjl(&["eval", "--model", "/nonexistent.json", "p"]).status.code(), Some(2));
    assert_eq!(cjl(&["prove", "--dialect", "LPCplus", "p > p"]).status.code(), Some(2));
    assert_eq!(cjl(&["eval", "--model", &fixture("sheep.json"), "--state", "nowhere", "p"]).status.code(), Some(2));
}

#[test]
fn parse_prints_canonical_text() {
    let o = cjl(&["parse", "p | q"]);
    assert_eq!(stdout(&o).trim(), "~(~p & ~q)");
    let o = cjl(&["parse", "--dialect", "JRC", "--format", "json", "(p & ~p) ~> q"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["atoms"], serde_json::json!(["p", "q"]));
    assert_eq!(v["subformulas"].as_array().unwrap().len(), 5);
}

#[test]
fn falsify_finds_and_rejects() {
    let o = cjl(&["falsify", "--dialect", "LPCplus", "--bound", "2", "x:p == x:(p&p)"]);
    assert!(stdout(&o).starts_with("COUNTERMODEL (2 states"));
    let o = cjl(&["falsify", "--dialect", "LPCplus", "--bound", "3", "false > p"]);
    assert!(stdout(&o).starts_with("NONE"));
}

#[test]
fn check_model_flags_rcea_violation() {
    let o = cjl(&["check-model", "--model", &fixture("rcea.json"), "(p > q) == (p & p > q)"]);
    let s = stdout(&o);
    assert!(s.contains("condition 9: FAIL (formulas [p, p & p])"), "{s}");
    let o = cjl(&["check-model", "--dialect", "LPCplus", "--model", &fixture("rcea.json"), "(p > q) == (p & p > q)"]);
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn check_proof_accepts_and_rejects() {
    let o = cjl(&["check-proof", &fixture("cc_lemma.txt")]);
    assert!(stdout(&o).starts_with("OK"));
    let dir = std::env::temp_dir().join(format!("cjl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "1. p > p ; ax3\n2. q ; mp 1 1\n").unwrap();
    let o = cjl(&["check-proof", bad.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("REJECTED line 2"), "{}", stdout(&o));
    let good = dir.join("good.txt");
    std::fs::write(&good, "1. p > p ; ax3\n").unwrap();
    let o = cjl(&["internalize", good.to_str().unwrap()]);
    assert!(stdout(&o).starts_with("term: c3"), "{}", stdout(&o));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn corpus_passes() {
    let o = cjl(&["corpus"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_end().ends_with("0 failed"));
}
