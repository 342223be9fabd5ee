use std::path::Path;
use std::process::{Command, Output};

fn qperiod(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qperiod")).args(args).current_dir(dir).output().unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = qperiod(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn wps_pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&["gen-wps", "--count", "60", "--dim-min", "3", "--dim-max", "5", "--seed", "3", "--out", "v.jsonl"], dir);
    assert_eq!(std::fs::read_to_string(dir.join("v.jsonl")).unwrap().lines().count(), 60);

    ok(&["features", "v.jsonl", "--dmax", "2000", "--out", "d.jsonl", "--csv", "f.csv"], dir);
    let csv = std::fs::read_to_string(dir.join("f.csv")).unwrap();
    assert_eq!(csv.lines().count(), 61);

    ok(&["train", "d.jsonl", "--train-frac", "0.5", "--out", "m.json"], dir);
    let report = ok(&["eval", "d.jsonl", "--model-file", "m.json", "--train-frac", "0.5"], dir);
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(v["accuracy"].as_f64().unwrap() > 0.5);
}

#[test]
fn single_variety_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&["periods", "1,1,0,0;0,0,1,1", "--dmax", "20", "--out", "p.csv"], dir);
    let rows = std::fs::read_to_string(dir.join("p.csv")).unwrap();
    assert!(rows.lines().any(|l| l.starts_with("2,")));

    let asy: serde_json::Value = serde_json::from_str(&ok(&["asympt", "1,1,1"], dir)).unwrap();
    assert!((asy["A"].as_f64().unwrap() - 3f64.ln()).abs() < 1e-12);

    let dim3: serde_json::Value = serde_json::from_str(&ok(&["enumerate-dim3", "--max-weight", "20"], dir)).unwrap();
    assert_eq!(dim3["counts"][0][1], 7);
}

#[test]
fn bad_input_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    for args in [
        &["run", "no-such-experiment"][..],
        &["periods", "2,4,6"][..],
        &["features", "missing.jsonl", "--out", "x"][..],
        &["gen-wps", "--window", "5:1:1"][..],
    ] {
        let out = qperiod(args, dir);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}
