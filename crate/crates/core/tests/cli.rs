use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    root.join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kripkekit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = run(&all);
    let value = serde_json::from_slice(&out.stdout).expect("json on stdout");
    (out.status.code().unwrap(), value)
}

#[test]
fn check_reports_through_exit_code() {
    let model = fixture("chain2.model.json");
    let (code, v) = json(&["check", &model, "a", "p | (p -> false)"]);
    assert_eq!(code, 1);
    assert_eq!(v["holds"], false);
    let (code, v) = json(&["check", &model, "b", "box p"]);
    assert_eq!(code, 0);
    assert_eq!(v["holds"], true);
}

#[test]
fn interp_lists_worlds() {
    let (code, v) = json(&["interp", &fixture("chain2.model.json"), "dia p"]);
    assert_eq!(code, 0);
    assert_eq!(v["worlds"], serde_json::json!(["b"]));
}

#[test]
fn proofs_are_counted() {
    let model = fixture("chain2.model2d.json");
    let (code, v) = json(&["proofs", &model, "a", "p -> p"]);
    assert_eq!((code, v["count"].as_u64()), (0, Some(2)));
    let (code, v) = json(&["proofs", &model, "a", "dia false"]);
    assert_eq!((code, v["count"].as_u64()), (1, Some(0)));
}

#[test]
fn complete_writes_the_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.json");
    let status = run(&["complete", &fixture("idempotent.category.json"), "-o", out.to_str().unwrap()]);
    assert!(status.status.success());
    let (code, v) = json(&["info", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["format"], "category");
    assert_eq!(v["summary"]["objects"], 2);
    assert_eq!(v["summary"]["arrows"], 5);
    assert_eq!(v["summary"]["cauchy_complete"], true);
}

#[test]
fn dual_accepts_distributive_and_rejects_m3() {
    let (code, v) = json(&["dual", &fixture("diamond.poset.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["lattice_size"], 6);
    assert!(v["frame_to_primes"].is_object());
    let (code, v) = json(&["dual", &fixture("m3.lattice.json")]);
    assert_eq!(code, 1);
    assert_eq!(v["prime_algebraic"], false);
}

#[test]
fn verify_runs_a_suite() {
    let (code, v) = json(&["verify", "galois", "--count", "10"]);
    assert_eq!(code, 0);
    assert_eq!(v["passed"], v["cases"]);
    let out = run(&["verify", "no-such-suite"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theorem-equiv"));
}

#[test]
fn bad_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{ "elements": ["a"], "covers": [["a", 3]] }"#).unwrap();
    let out = run(&["info", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));

    let out = run(&["check", &fixture("chain2.model.json"), "a", "p &"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["check", "/nonexistent.json", "a", "p"]);
    assert_eq!(out.status.code(), Some(2));
}
