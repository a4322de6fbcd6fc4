use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_maxwell");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_ensemble(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn regular_36(dir: &Path) -> String {
    write_ensemble(dir, "e36.json", r#"{"lambda":{"3":1.0},"rho":{"6":1.0}}"#)
        .to_string_lossy()
        .into_owned()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn thresholds_of_regular_36() {
    let dir = tempfile::tempdir().unwrap();
    let e = regular_36(dir.path());
    let o = run(&["thresholds", "--ensemble", &e]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r[0], ["bp", "stability", "shannon", "map_upper", "map", "map_tight", "design_rate"]);
    let bp: f64 = r[1][0].parse().unwrap();
    let map: f64 = r[1][4].parse().unwrap();
    assert!((bp - 0.4294398).abs() < 1e-6);
    assert!((map - 0.4881508841915644).abs() < 1e-11);
    assert_eq!(r[1][2], "0.5");
    assert_eq!(r[1][5], "true");
}

#[test]
fn csv_and_sidecar_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let e = regular_36(dir.path());
    let out = dir.path().join("curve.csv");
    let o = run(&["curve", "--ensemble", &e, "--kind", "map", "--grid", "2000", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert!(rows(&csv).len() > 100);
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert!(side.is_object());
}

#[test]
fn psi_vanishes_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let e = regular_36(dir.path());
    let o = run(&["psi", "--ensemble", &e, "--epsilon", "0.52"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = rows(&text).into_iter().find(|r| r[0] == "1").expect("row at u = 1");
    let value: f64 = row[2].parse().unwrap();
    assert!(value.abs() < 1e-12);
}

#[test]
fn exact_exit_of_hamming_7() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.csv");
    let o = run(&["exact-exit", "--code", "hamming:3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(side["integral"], "4/7");
    assert_eq!(side["area_identity"], true);
    assert_eq!(side["n"], 7);
    assert_eq!(side["k"], 4);
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let e = regular_36(dir.path());
    let args = ["simulate", "--ensemble", &e, "--epsilon", "0.47", "--n", "400", "--trials", "12", "--seed", "9", "--bins", "10"];
    let a = Command::new(BIN).args(args).env("MAXWELL_THREADS", "1").output().unwrap();
    let b = Command::new(BIN).args(args).env("MAXWELL_THREADS", "4").output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(rows(&stdout(&a)).len(), 11);
}

#[test]
fn simulate_event_logs() {
    let dir = tempfile::tempdir().unwrap();
    let e = regular_36(dir.path());
    let logs = dir.path().join("logs");
    let o = run(&[
        "simulate", "--ensemble", &e, "--epsilon", "0.5", "--n", "200", "--trials", "3", "--log-dir",
        logs.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read_to_string(logs.join("run_00000.csv")).unwrap();
    assert!(first.starts_with("time,kind,bit,entropy,determined"));
}

#[test]
fn gldpc_hamming_component() {
    let o = run(&["gldpc", "--hamming", "3"]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    let bp: f64 = r[1][0].parse().unwrap();
    let upper: f64 = r[1][1].parse().unwrap();
    assert!((bp - 0.75645).abs() < 1e-4 && (upper - 0.85616).abs() < 1e-4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let o = run(&["thresholds", "--ensemble", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.json"));

    let bad = write_ensemble(dir.path(), "bad.json", r#"{"lambda":{"3":-1.0},"rho":{"6":1.0}}"#);
    assert_eq!(run(&["thresholds", "--ensemble", bad.to_str().unwrap()]).status.code(), Some(2));

    let e = regular_36(dir.path());
    assert_eq!(run(&["trajectory", "--ensemble", &e, "--epsilon", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["exact-exit", "--code", "spc:30"]).status.code(), Some(4));
    assert_eq!(run(&["exact-exit", "--code", "bogus"]).status.code(), Some(2));
}

#[test]
fn version_reports_tolerances() {
    let o = run(&["--version"]);
    assert!(o.status.success());
    let v = stdout(&o);
    assert!(v.contains("tol 1e-12") && v.contains("grid 10000") && v.contains("csv digits 12"), "{v}");
}
