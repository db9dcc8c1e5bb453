//! End-to-end tests of the `helmholo` binary: exit codes, output artifacts,
//! and byte-level determinism under a fixed seed.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_helmholo"))
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("helmholo-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(run(&[]).status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn dtn_symbol_prints_value_and_respects_range() {
    let out = run(&["dtn-symbol", "--n", "0", "--z", "1000"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let parts: Vec<f64> = text
        .split_whitespace()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(parts.len(), 2);
    // outgoing limit: symbol(0, z) -> i as z -> infinity
    assert!(parts[0].abs() < 1e-3);
    assert!((parts[1] - 1.0).abs() < 1e-3);

    // argument outside the supported range is a usage error
    let out = run(&["dtn-symbol", "--n", "0", "--z", "1e9"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_thread_count_is_a_usage_error() {
    let out = bin()
        .args(["dtn-symbol", "--n", "0", "--z", "10"])
        .env("HELMHOLO_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_is_deterministic_across_runs() {
    let dirs = [tmp_dir("det-a"), tmp_dir("det-b")];
    for dir in &dirs {
        let out = run(&[
            "solve",
            "--k",
            "25",
            "--y",
            "0.001,0.002",
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dirs[0].join("solution.csv")).unwrap();
    let b = std::fs::read(dirs[1].join("solution.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "identical runs must produce identical artifacts");
    // provenance comment: version and config hash
    let head = String::from_utf8_lossy(&a);
    let first = head.lines().next().unwrap();
    assert!(first.starts_with('#'), "missing comment line: {first}");
    assert!(first.contains(env!("CARGO_PKG_VERSION")));
    for dir in &dirs {
        let _ = std::fs::remove_dir_all(dir);
    }
}

#[test]
fn poles_subcommand_passes_the_strip_check() {
    let dir = tmp_dir("poles");
    let out = run(&[
        "poles",
        "--m-lo",
        "5",
        "--m-hi",
        "8",
        "--pencil-upto",
        "0",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("poles.csv")).unwrap();
    // 4 transcendental rows + comment + header
    assert_eq!(csv.lines().count(), 6);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn norm_relations_hold_at_k20() {
    let dir = tmp_dir("normrel");
    let out = run(&["norm-relations", "--k", "20", "--out-dir", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn cauchy_rejects_circles_leaving_the_guaranteed_region() {
    let out = run(&["cauchy", "--k", "30", "--radius", "10"]);
    assert_ne!(out.status.code(), Some(0));
    // and accepts a checked circle well inside
    let out = run(&["cauchy", "--k", "30", "--radius", "1e-4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let residual: f64 = text.trim().parse().unwrap();
    assert!(residual <= 1e-8, "in-region residual {residual}");
}
