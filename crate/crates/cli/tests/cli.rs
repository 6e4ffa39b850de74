use std::path::{Path, PathBuf};
use std::process::Command;

use ries_core::model::{TimeProfile, Unit};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ries-opt"))
}

/// The single `<out>/<stamp>/<cmd>` directory a run produced.
fn run_dir(out: &Path, cmd: &str) -> PathBuf {
    let stamps: Vec<_> = std::fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(stamps.len(), 1, "{stamps:?}");
    stamps[0].join(cmd)
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn scenarios_writes_comparison_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let st = bin().args(["scenarios", "--out"]).arg(tmp.path()).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let dir = run_dir(tmp.path(), "scenarios");
    let csv = std::fs::read_to_string(dir.join("comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let m = manifest(&dir);
    assert_eq!(m["command"], "scenarios");
    assert_eq!(m["success"], true);
    for f in m["files"].as_array().unwrap() {
        assert!(dir.join(f.as_str().unwrap()).exists(), "{f}");
    }
}

#[test]
fn single_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let st = bin().args(["scenarios", "--scenario", "3", "--out"]).arg(tmp.path()).output().unwrap();
    assert!(st.status.success());
    let dir = run_dir(tmp.path(), "scenarios");
    let csv = std::fs::read_to_string(dir.join("comparison.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn bilevel_prices_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["bilevel", "--ga-generations", "2", "--ga-pop", "4", "--seed", "3", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let dir = run_dir(tmp.path(), "bilevel");
    let text = std::fs::read_to_string(dir.join("prices.csv")).unwrap();
    let p = TimeProfile::from_csv_reader(text.as_bytes(), Unit::YuanPerKwh).unwrap();
    assert_eq!(p.to_csv_string(), text);
    assert_eq!(manifest(&dir)["seed"], 3);
}

#[test]
fn sensitivity_subset() {
    let tmp = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["sensitivity", "--params", "F1,F5", "--samples", "3", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let dir = run_dir(tmp.path(), "sensitivity");
    let csv = std::fs::read_to_string(dir.join("samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
}

#[test]
fn validate_accepts_bundle_and_rejects_garbage() {
    let tmp = tempfile::tempdir().unwrap();
    let st = bin().args(["validate", "--out"]).arg(tmp.path()).output().unwrap();
    assert!(st.status.success());

    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "[gt]\neta_e = -1.0\n").unwrap();
    let st = bin().args(["validate", "--config"]).arg(&bad).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    assert!(!st.stderr.is_empty());
}

#[test]
fn unknown_parameter_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["sensitivity", "--params", "F99", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&st.stderr).contains("F99"));
}
