use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mediator-witness")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_model(name: &str, text: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("mw-{}-{name}.toml", std::process::id()));
    std::fs::File::create(&path).unwrap().write_all(text.as_bytes()).unwrap();
    path
}

#[test]
fn example_passes_and_prints_the_table() {
    let o = run(&["example"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("{q_zA q_xM, q_xA}"));
    assert!(out.contains("[PASS] nonclassicality.condition3"));
    assert!(out.contains("13 checks, 0 failed"));
}

#[test]
fn corrupted_gate_is_caught() {
    let o = run(&["example", "--corrupt-gate", "--format", "records"]);
    assert_eq!(o.status.code(), Some(1));
    let failing: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .filter(|v: &serde_json::Value| v["status"] == "fail")
        .collect();
    assert_eq!(failing.len(), 1);
    assert_eq!(failing[0]["check_id"], "picture_equivalence");
}

#[test]
fn search_records_are_byte_identical() {
    let args = ["search", "--dim", "3", "--steps", "2", "--samples", "500", "--seed", "9", "--format", "records"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let first: serde_json::Value = serde_json::from_str(stdout(&a).lines().next().unwrap()).unwrap();
    assert_eq!(first["check_id"], "search.classical");
    assert_eq!(first["metadata"]["seed"], 9);
    assert_eq!(first["metadata"]["samples"], 500);
}

#[test]
fn bad_budgets_are_usage_errors() {
    for args in
        [&["search", "--samples", "0"][..], &["search", "--dim", "5"], &["search", "--steps", "0"], &["frobnicate"]]
    {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bundled_models_pass() {
    for name in ["classical_bit", "classical_trit", "stabilizer_qubit"] {
        let o = run(&["check-model", name]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
    }
    let out = stdout(&run(&["check-model", "stabilizer_qubit", "--format", "records"]));
    assert!(out.contains(r#""check_id":"model.superinformation.X.Z","status":"pass""#));
}

#[test]
fn malformed_model_reports_the_line() {
    let path =
        temp_model("malformed", "schema_version = 1\nname = \"m\"\n[[substrate]]\nname = \"s\"\nstates = [\"0\", \n");
    let o = run(&["check-model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line"), "{err}");
    std::fs::remove_file(path).ok();
}

#[test]
fn missing_model_file_is_an_error() {
    let o = run(&["check-model", "/nonexistent/model.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn wrong_expectation_fails_the_check() {
    let text =
        include_str!("../models/classical_bit.toml").replace("superinformation = false", "superinformation = true");
    let path = temp_model("wrong", &text);
    let o = run(&["check-model", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("[FAIL] model.superinformation"));
    std::fs::remove_file(path).ok();
}
