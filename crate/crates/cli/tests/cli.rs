use std::path::Path;
use std::process::{Command, Output};

fn ucet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ucet")).args(args).output().unwrap()
}

fn tiny(dir: &Path) -> String {
    let path = dir.join("tiny.json");
    let out = ucet(&["generate", "--tiny", "2,3", "--seed", "0", "-o", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path.to_str().unwrap().to_string()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn generate_then_verify_agrees_with_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let inst = tiny(dir.path());
    let out = ucet(&["verify", "--instance", &inst]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn solve_prints_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let inst = tiny(dir.path());
    let v = json(&ucet(&["solve", "--instance", &inst, "--mu", "fixed:1"]));
    assert!(v.is_object());
    let out = ucet(&["solve", "--instance", &inst, "--out", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with("k,"));
}

#[test]
fn piecewise_relaxations_are_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let inst = tiny(dir.path());
    let value = |f: &str| {
        let v = json(&ucet(&["relax", "--instance", &inst, "--formulation", f]));
        v["value"].as_f64().unwrap()
    };
    assert!(value("s_pw") <= value("pc_pw") + 1e-6);
}

#[test]
fn generated_rows_have_the_benchmark_fleet_size() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("row1.json");
    let out = ucet(&["generate", "--row", "1", "-o", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["units"].as_array().map(|a| a.len()), Some(28));
}

#[test]
fn profile_from_a_metric_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, r#"{"methods":["a","b"],"problems":["p","q"],"metric":[[1.0,2.0],[3.0,3.0]]}"#).unwrap();
    let out = ucet(&["profile", "--input", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = tiny(dir.path());
    assert_eq!(ucet(&["solve", "--instance", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(ucet(&["solve", "--instance", &inst, "--mu", "fixed:2"]).status.code(), Some(1));
    assert_eq!(ucet(&["bench", "--rows", "0"]).status.code(), Some(1));
}

#[test]
fn unknown_rows_are_rejected() {
    let out = ucet(&["generate", "--row", "23", "-o", "/tmp/never-written.json"]);
    assert_eq!(out.status.code(), Some(1));
}
