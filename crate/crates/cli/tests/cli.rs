//! End-to-end checks of the `modspace` binary: exact values on small
//! fixtures, reproducibility, config-file precedence, and error behavior.

use std::path::PathBuf;
use std::process::{Command, Output};

use num_complex::Complex64;

use modspace::io;
use modspace::{Field, GridSpec, SpectralField};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_modspace")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary launches")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "expected success, stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn tmp_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

/// `e^{i3x}` sampled on a 16-point circle.
fn single_mode_fixture(name: &str) -> PathBuf {
    let g = GridSpec::new(1, 1, 16).unwrap();
    let f = SpectralField::delta(g, &[3, 0, 0], Complex64::new(1.0, 0.0))
        .unwrap()
        .ifft();
    let path = tmp_path(name);
    io::write_field(&path, &f).unwrap();
    path
}

fn constant_fixture(name: &str, value: f64) -> PathBuf {
    let g = GridSpec::new(1, 1, 8).unwrap();
    let f = Field::constant(g, Complex64::new(value, 0.0));
    let path = tmp_path(name);
    io::write_field(&path, &f).unwrap();
    path
}

#[test]
fn norm_of_single_mode_is_sqrt_two_pi() {
    let path = single_mode_fixture("mode3_norm.json");
    let doc = stdout_json(&run(&[
        "norm",
        path.to_str().unwrap(),
        "--s",
        "0",
        "--p",
        "2",
        "--q",
        "2",
    ]));
    let norm = doc["norm"].as_f64().unwrap();
    let expected = (2.0 * std::f64::consts::PI).sqrt();
    assert!((norm - expected).abs() <= 1e-10, "norm {norm} vs {expected}");
    // Manifest carries the resolved config and the input digest.
    assert_eq!(doc["manifest"]["command"], "norm");
    assert_eq!(doc["manifest"]["config"]["s"], 0.0);
    let digests = doc["manifest"]["input_digests"].as_object().unwrap();
    assert_eq!(digests.len(), 1);
}

#[test]
fn norm_breakdown_recombines_to_the_total() {
    let path = single_mode_fixture("mode3_breakdown.json");
    let doc = stdout_json(&run(&[
        "norm",
        path.to_str().unwrap(),
        "--s",
        "1",
        "--q",
        "2",
        "--breakdown",
    ]));
    let total = doc["norm"].as_f64().unwrap();
    let rows = doc["breakdown"].as_array().unwrap();
    assert!(!rows.is_empty());
    let sum_q: f64 = rows
        .iter()
        .map(|r| r["weighted"].as_f64().unwrap().powi(2))
        .sum();
    assert!(
        (sum_q.sqrt() - total).abs() <= 1e-12 * total.max(1.0),
        "breakdown recombination {} vs total {total}",
        sum_q.sqrt()
    );
    // Single mode at k = 3 with s = 1: the only box contributes ⟨3⟩·√(2π).
    let expected = 10.0_f64.sqrt() * (2.0 * std::f64::consts::PI).sqrt();
    assert!((total - expected).abs() <= 1e-10);
}

#[test]
fn missing_field_file_is_single_line_error() {
    let out = run(&["norm", "/nonexistent/field.json"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error: "), "stderr: {stderr}");
    assert_eq!(stderr.trim_end().lines().count(), 1, "stderr: {stderr}");
}

#[test]
fn unknown_subcommand_prints_usage_and_fails() {
    let out = run(&["frobnicate"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage"), "stderr: {stderr}");
}

#[test]
fn invalid_alpha_is_rejected() {
    let out = run(&["classify", "--equation", "heat", "--alpha", "0"]);
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error: "), "stderr: {stderr}");
}

#[test]
fn classify_reports_the_subcritical_example() {
    let doc = stdout_json(&run(&[
        "classify", "--equation", "heat", "--alpha", "1", "--n", "1", "--k", "2", "--s", "0.2",
        "--q", "2",
    ]));
    assert_eq!(doc["verdict"]["status"], "well-posed");
    let sigma = doc["verdict"]["sigma"].as_f64().unwrap();
    assert!((sigma - (-0.3)).abs() <= 1e-12);
    let summary = doc["summary"].as_str().unwrap();
    assert!(summary.contains("well-posed"), "summary: {summary}");
}

#[test]
fn classify_boundary_lands_in_the_gap() {
    let doc = stdout_json(&run(&[
        "classify", "--equation", "schrodinger", "--n", "1", "--k", "3", "--s", "-0.5", "--q", "2",
    ]));
    assert_eq!(doc["verdict"]["status"], "gap");
}

#[test]
fn sweep_degenerate_range_gives_one_row() {
    let out = run(&[
        "sweep", "--s-min", "-1.5", "--s-max", "-1.5", "--s-steps", "1", "--q-list", "2",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines.len(), 2, "csv: {text}");
    assert_eq!(lines[0], "s,q,sigma,status,rule");
    assert!(lines[1].starts_with("-1.5,2,"), "row: {}", lines[1]);
}

#[test]
fn sweep_default_grid_shows_three_verdict_bands() {
    let out = run(&["sweep"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for status in ["well-posed", "ill-posed", "gap"] {
        assert!(
            text.lines().any(|l| l.contains(status)),
            "missing {status} band in:\n{text}"
        );
    }
    // The ill-posed and well-posed bands are separated by the σ = −1 and
    // s = −1 lines: nothing ill-posed above both, nothing well-posed below.
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let s: f64 = cells[0].parse().unwrap();
        let sigma: f64 = cells[2].parse().unwrap();
        match cells[3] {
            "well-posed" => assert!(s >= 0.0 && sigma > -1.0, "bad row {line}"),
            "ill-posed" => assert!(sigma < -1.0 || s < -1.0, "bad row {line}"),
            _ => {}
        }
    }
}

#[test]
fn default_inflation_probe_is_consistent() {
    let doc = stdout_json(&run(&["probe", "inflation", "--case", "1"]));
    let report = &doc["report"];
    assert_eq!(report["exponent_verdict"], "consistent");
    assert_eq!(report["input"]["verdict"], "consistent");
    assert!(report["inflation_exponent"].as_f64().unwrap() > 0.0);
}

#[test]
fn evolve_riccati_fixture_matches_the_closed_form() {
    let path = constant_fixture("riccati_cli.json", 0.1);
    let doc = stdout_json(&run(&[
        "evolve",
        path.to_str().unwrap(),
        "--equation",
        "heat",
        "--alpha",
        "1",
        "--k",
        "2",
        "--t",
        "1",
    ]));
    let mode0 = doc["final_mode0"][0].as_f64().unwrap();
    assert!((mode0 - 1.0 / 9.0).abs() <= 1e-6, "u(1) = {mode0}");
    assert_eq!(doc["diagnostics"]["converged"], true);
    let residual = doc["residual"].as_f64().unwrap();
    assert!(residual <= 1e-8, "residual {residual}");
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "probe",
        "product",
        "--lambda-list",
        "4,8,16",
        "--ensemble-size",
        "5",
        "--seed",
        "11",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "report runs must agree byte-for-byte");

    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let c1 = run(&csv_args);
    let c2 = run(&csv_args);
    assert!(c1.status.success());
    assert_eq!(c1.stdout, c2.stdout, "csv runs must agree byte-for-byte");
    assert_ne!(first.stdout, c1.stdout);
}

#[test]
fn config_file_fills_gaps_and_flags_win() {
    let field = single_mode_fixture("mode3_config.json");
    let config = tmp_path("norm_config.json");
    std::fs::write(&config, r#"{"s": 1.0, "q": "inf"}"#).unwrap();

    // Config alone: s = 1, q = inf. Single box, so the norm is ⟨3⟩·√(2π).
    let doc = stdout_json(&run(&[
        "norm",
        field.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
    ]));
    let expected = 10.0_f64.sqrt() * (2.0 * std::f64::consts::PI).sqrt();
    assert!((doc["norm"].as_f64().unwrap() - expected).abs() <= 1e-10);
    assert_eq!(doc["manifest"]["config"]["s"], 1.0);
    assert_eq!(doc["manifest"]["config"]["q"], "inf");

    // Explicit --s 0 overrides the config; q stays inf from the config.
    let doc = stdout_json(&run(&[
        "norm",
        field.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--s",
        "0",
    ]));
    let expected = (2.0 * std::f64::consts::PI).sqrt();
    assert!((doc["norm"].as_f64().unwrap() - expected).abs() <= 1e-10);
    assert_eq!(doc["manifest"]["config"]["s"], 0.0);
    assert_eq!(doc["manifest"]["config"]["q"], "inf");
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let field = single_mode_fixture("mode3_out.json");
    let out_path = tmp_path("norm_report.json");
    let out = run(&[
        "norm",
        field.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(doc["norm"].as_f64().is_some());
}

#[test]
fn decompose_reports_a_tiny_reconstruction_residual() {
    let field = single_mode_fixture("mode3_decompose.json");
    let doc = stdout_json(&run(&["decompose", field.to_str().unwrap()]));
    let rel = doc["reconstruction_rel_error"].as_f64().unwrap();
    assert!(rel <= 1e-10, "reconstruction error {rel}");
    let boxes = doc["boxes"].as_array().unwrap();
    // Raised-cosine boxes see only mode 3: exactly one nonzero piece.
    let nonzero = boxes
        .iter()
        .filter(|b| b["l2"].as_f64().unwrap() > 1e-12)
        .count();
    assert_eq!(nonzero, 1);
}
