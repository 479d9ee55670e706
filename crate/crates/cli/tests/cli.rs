use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bpatch(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpatch")).args(args).current_dir(cwd).output().unwrap()
}

const SMALL: &str = "[grid]\nn = 64\n\n[time]\nhorizon = 0.02\n";

#[test]
fn unknown_subcommand_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = bpatch(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn bad_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.toml"), "[grid]\nn = 7\n").unwrap();
    let out = bpatch(&["run", "--config", "c.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn run_then_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("c.toml"), SMALL).unwrap();
    fs::write(p.join("probes.csv"), "x,y\n4,4\n4,3.2\n").unwrap();
    let out = bpatch(&["run", "--config", "c.toml", "--out", "r", "--probes", "probes.csv"], p);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let summary = fs::read_to_string(p.join("r/summary.txt")).unwrap();
    assert!(summary.contains("PASS bound ledger"), "{summary}");
    assert!(summary.ends_with("overall: PASS\n"));
    let diag = fs::read_to_string(p.join("r/diag.csv")).unwrap();
    assert!(diag.lines().all(|l| l.split(',').count() == 14));
    assert_eq!(diag.lines().count(), 6);

    let out = bpatch(&["diagnose", "--run", "r", "--probes", "probes.csv", "--time", "0.02", "--gamma", "0.5"], p);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x1,x2,t,d_t,eps,U,delta,t_star,case,J1,J2,J3,J4,J1_bound,J2_bound,J3_bound,J4_bound,I1,I1_bound");
    assert_eq!(lines.len(), 3);
    // same ledger as the one written by `run` at the final time
    assert_eq!(csv, fs::read_to_string(p.join("r/ledger.csv")).unwrap());

    let out = bpatch(&["diagnose", "--run", "r", "--probes", "probes.csv", "--time", "0.02", "--gamma", "1.5"], p);
    assert_eq!(out.status.code(), Some(2));
    let out = bpatch(&["diagnose", "--run", "r", "--probes", "probes.csv", "--time", "0.3", "--gamma", "0.5"], p);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0.3"));
}

#[test]
fn bench_prints_rates() {
    let dir = tempfile::tempdir().unwrap();
    let out = bpatch(&["bench", "--n", "64", "--seconds", "0.05"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fft", "step", "pv-probe"] {
        assert!(text.lines().any(|l| l.starts_with(name) && l.ends_with("ops/sec")), "{text}");
    }
}
