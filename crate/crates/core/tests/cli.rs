use std::path::PathBuf;
use std::process::{Command, Output};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn worldsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_worldsim")).args(args).env_remove("WORLDSIM_OUT_DIR").output().unwrap()
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

#[test]
fn pi_run_reports_half_half() {
    let out = worldsim(&["run", &cfg("mzi.cfg"), "--set", "theta=1.5707963267948966"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let q = &v["quantities"];
    assert!((q["detector_DH"].as_f64().unwrap() - 0.5).abs() < 1e-12, "{q}");
    assert!((q["detector_DV"].as_f64().unwrap() - 0.5).abs() < 1e-12, "{q}");
}

#[test]
fn spins_csv() {
    let out = worldsim(&["run", &cfg("spins.cfg"), "--set", "n=2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "m,weight,weight_rational\r\n0,0.25,1/4\r\n1,0.5,1/2\r\n2,0.25,1/4\r\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "scenario = \"mzi\"\n[params\ntheta = 1\n").unwrap();
    assert_eq!(worldsim(&["run", bad.to_str().unwrap()]).status.code(), Some(2));
    let out = worldsim(&["run", &cfg("mzi.cfg"), "--set", "theta=\"wide\""]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params.theta"));
    assert_eq!(worldsim(&["run", &cfg("mzi.cfg"), "--set", "scenario=\"nope\""]).status.code(), Some(3));
    assert_eq!(worldsim(&["verify", "nope", "42"]).status.code(), Some(4));
    assert_eq!(worldsim(&["run", &cfg("spins.cfg"), "--format", "tree"]).status.code(), Some(5));
    assert_eq!(worldsim(&["bogus"]).status.code(), Some(2));
}

#[test]
fn out_dir_and_tree_export() {
    let dir = tempfile::tempdir().unwrap();
    let run = Command::new(env!("CARGO_BIN_EXE_worldsim"))
        .args(["run", &cfg("mzi_general.cfg")])
        .env("WORLDSIM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
    let report = dir.path().join("mzi.json");
    assert!(report.exists());
    let out = worldsim(&["export-tree", report.to_str().unwrap(), "--style", "graphviz"]);
    assert_eq!(out.status.code(), Some(0));
    let dot = String::from_utf8(out.stdout).unwrap();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("peripheries=2").count(), 2);

    let spins = dir.path().join("spins.json");
    assert_eq!(worldsim(&["run", &cfg("spins.cfg"), "--format", "json", "--out", spins.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(worldsim(&["export-tree", spins.to_str().unwrap()]).status.code(), Some(5));
}

#[test]
fn verify_is_repeatable() {
    let a = worldsim(&["verify", "nosignal", "42"]);
    let b = worldsim(&["verify", "nosignal", "42"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["failures"].as_array().unwrap().len(), 0);
}
