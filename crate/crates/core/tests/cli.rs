//! End-to-end checks of the `sasaki` binary: exit codes, CSV layout, JSON
//! reports, and config diagnostics.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sasaki")
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("sasaki-cli-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn verify_zero_section_passes_with_tight_summary() {
    let json = tmp_path("zero.json");
    let out = run(&[
        "verify",
        "zero-section",
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("zero-section: PASS"), "{stdout}");
    // summary max residual well under 1e-8
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(report["max_residual"]["value"].as_f64().unwrap() <= 1e-8);
    assert_eq!(report["outcome"], "pass");
    std::fs::remove_file(json).ok();
}

#[test]
fn verify_killing_sphere_meets_positive_expectation() {
    let out = run(&["verify", "killing-sphere"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS"), "{stdout}");
}

#[test]
fn verify_exit_codes_distinguish_fail_and_inconclusive() {
    // raising the pass floor above the actual grid minimum (~0.27) flips the
    // residual_positive expectation to a failure
    let out = run(&["verify", "killing-sphere", "--tol", "1.0", "--fail-tol", "1e9"]);
    assert_eq!(out.status.code(), Some(1));
    // pass floor above the actual residual but fail floor below: inconclusive
    let out = run(&["verify", "zero-section", "--tol", "1e-20", "--fail-tol", "1e-3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_unknown_scenario_is_a_usage_error() {
    let out = run(&["verify", "does-not-exist"]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("unknown scenario"), "{stderr}");
}

#[test]
fn geodesic_flat_trace_has_expected_endpoint() {
    let csv = tmp_path("flat.csv");
    let out = run(&[
        "geodesic",
        "--config",
        repo_config("flat_geodesic.json").to_str().unwrap(),
        "--sigma",
        "1.0",
        "--step",
        "0.001",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let body = std::fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sigma,x1,x2,xdot1,xdot2,xi1,xi2,xidot1,xidot2,energy"
    );
    let last = body.lines().last().unwrap();
    let fields: Vec<f64> = last.split(',').map(|v| v.parse().unwrap()).collect();
    assert!((fields[0] - 1.0).abs() < 1e-12); // sigma
    assert!((fields[1] - 1.0).abs() < 1e-12); // x1
    assert!(fields[2].abs() < 1e-12); // x2
    assert!(fields[5].abs() < 1e-12); // xi1
    assert!((fields[6] - 1.0).abs() < 1e-12); // xi2
    std::fs::remove_file(csv).ok();
}

#[test]
fn geodesic_oracle_flag_reports_divergence() {
    let csv = tmp_path("conf.csv");
    let out = run(&[
        "geodesic",
        "--config",
        repo_config("conformal_geodesic.json").to_str().unwrap(),
        "--sigma",
        "0.5",
        "--step",
        "0.005",
        "--csv",
        csv.to_str().unwrap(),
        "--oracle",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("oracle cross-check: max divergence"), "{stdout}");
    let div: f64 = stdout
        .split("max divergence ")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(div <= 1e-6, "divergence {div}");
    std::fs::remove_file(csv).ok();
}

#[test]
fn residual_command_classifies_band_meridian_as_fail() {
    let out = run(&[
        "residual",
        "--config",
        repo_config("band_meridian_residual.json").to_str().unwrap(),
    ]);
    // the meridian field on the full band is decisively not totally geodesic
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("residual: FAIL"), "{stdout}");
}

#[test]
fn residual_command_passes_expression_zero_section() {
    let json = tmp_path("expr.json");
    let out = run(&[
        "residual",
        "--config",
        repo_config("expression_metric_residual.json").to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["outcome"], "pass");
    assert_eq!(report["expectation"], "residual_zero");
    std::fs::remove_file(json).ok();
}

#[test]
fn bad_config_exits_3_named_field() {
    let bad = tmp_path("bad.json");
    std::fs::write(
        &bad,
        r#"{"manifold": {"builtin": "euclidean", "dim": 2},
            "patch": {"builtin": "full", "domain": {"lo": [0], "hi": [1, 2]}},
            "field": {"builtin": "zero"}}"#,
    )
    .unwrap();
    let out = run(&["residual", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("patch.domain"), "{stderr}");
    std::fs::remove_file(bad).ok();
}

#[test]
fn list_prints_scenarios_and_builtins() {
    let out = run(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    for name in [
        "zero-section",
        "parallel-flat",
        "flat-nonparallel",
        "flat-compact-contrast",
        "killing-sphere",
        "equatorial-zone",
        "normal-parallel",
        "th3-degenerate",
        "lie-centralizer",
        "lie-semisimple",
        "lie-abelian",
    ] {
        assert!(stdout.contains(name), "missing scenario {name}");
    }
    assert!(stdout.contains("euclidean"));
    assert!(stdout.contains("sphere-band"));
}
