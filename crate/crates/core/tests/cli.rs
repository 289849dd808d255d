use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PAIR: &str = r#"{"dimension":2,
  "functions":[{"family":"gaussian","c":1.0,"A":[[1,0],[0,1]]},
               {"family":"gaussian","c":2.0,"A":[[2,0],[0,2]]}],
  "generators":[{"kind":"power","lambda":1.0},{"kind":"power","lambda":1.0}]}"#;
const STANDARD: &str = r#"{"dimension":2,"functions":[{"family":"gaussian","A":[[1,0],[0,1]]}]}"#;
const ANISOTROPIC: &str = r#"{"dimension":2,"functions":[{"family":"gaussian","A":[[1,0],[0,4]]}]}"#;

fn logdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logdiv"))
        .args(args)
        .env_remove("LOGDIV_MAX_THREADS")
        .output()
        .expect("binary runs")
}

fn config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn record(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "{text}");
    serde_json::from_str(text.trim()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn mixed_divergence_of_two_gaussians() {
    let dir = TempDir::new().unwrap();
    let cfg = config(&dir, "pair.json", PAIR);
    let r = record(&logdiv(&["divergence", "mixed", "--config", s(&cfg)]));
    assert!((r["value"].as_f64().unwrap() - 5.92384).abs() < 1e-5);
    assert!(r["error"].as_f64().unwrap() <= 1e-6);
    assert_eq!(r["kind"], "mixed");
}

#[test]
fn surface_area_at_zero_and_infinity() {
    let dir = TempDir::new().unwrap();
    let std = config(&dir, "std.json", STANDARD);
    let r = record(&logdiv(&["surface", "--lambda", "0", "--config", s(&std)]));
    assert!((r["value"].as_f64().unwrap() - std::f64::consts::TAU).abs() < 1e-6);

    let aniso = config(&dir, "aniso.json", ANISOTROPIC);
    let r = record(&logdiv(&["surface", "--lambda", "inf", "--config", s(&aniso)]));
    assert!((r["value"].as_f64().unwrap() - 4.0).abs() < 1e-9);
    let r = record(&logdiv(&["surface", "--lambda", "-inf", "--config", s(&aniso)]));
    assert!((r["value"].as_f64().unwrap() - 0.25).abs() < 1e-9);
}

#[test]
fn conjugate_and_omega() {
    let dir = TempDir::new().unwrap();
    let aniso = config(&dir, "aniso.json", ANISOTROPIC);
    let r = record(&logdiv(&["conjugate", "--at", "1,1", "--config", s(&aniso)]));
    assert!((r["value"].as_f64().unwrap() - 0.625).abs() < 1e-12);
    let r = record(&logdiv(&["omega", "--config", s(&aniso)]));
    assert!((r["value"].as_f64().unwrap() - 4.0).abs() < 1e-6);
}

#[test]
fn verify_writes_one_line_per_trial() {
    let out = logdiv(&["verify", "--check", "bs_mixed", "--seed", "42", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    for line in text.lines() {
        let r: Value = serde_json::from_str(line).unwrap();
        assert_eq!(r["check"], "bs_mixed");
        assert_ne!(r["verdict"], "violated");
    }
}

#[test]
fn verify_reports_are_byte_identical_across_runs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for dir in [&a, &b] {
        let out = logdiv(&[
            "verify", "--check", "af_surface", "--check", "isoperimetric", "--trials", "3", "--out", s(dir.path()),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |d: &TempDir| std::fs::read(d.path().join("reports.jsonl")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(String::from_utf8(read(&a)).unwrap().lines().count(), 6);
}

#[test]
fn sweep_writes_csv() {
    let dir = TempDir::new().unwrap();
    let std = config(&dir, "std.json", STANDARD);
    let out = logdiv(&[
        "sweep", "--lambda-from", "0", "--lambda-to", "1", "--steps", "4", "--config", s(&std), "--out", s(dir.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["lambda", "value", "error", "evals"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let value: f64 = row[1].parse().unwrap();
        assert!((value - std::f64::consts::TAU).abs() < 1e-6);
    }
}

#[test]
fn usage_errors_exit_64() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(logdiv(&["omega", "--config", s(&missing)]).status.code(), Some(64));
    let bad = config(&dir, "bad.json", r#"{"dimension":2,"functions":[{"family":"sphere"}]}"#);
    assert_eq!(logdiv(&["omega", "--config", s(&bad)]).status.code(), Some(64));
    assert_eq!(logdiv(&["verify", "--check", "no_such_check"]).status.code(), Some(64));
    assert_eq!(logdiv(&["frobnicate"]).status.code(), Some(64));
    let std = config(&dir, "std.json", STANDARD);
    assert_eq!(logdiv(&["conjugate", "--at", "1,2,3", "--config", s(&std)]).status.code(), Some(64));

    let threads = Command::new(env!("CARGO_BIN_EXE_logdiv"))
        .args(["omega", "--config", s(&std)])
        .env("LOGDIV_MAX_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(64));
}

#[test]
fn help_succeeds() {
    let out = logdiv(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("verify"));
}
