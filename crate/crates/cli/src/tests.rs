use std::path::Path;

use ipsbell::{GaussianSumRecord, PhasePoint, TwoModeGaussianSum};
use serde_json::Value;

use crate::{execute, CliError};

fn ipsbell(dir: &Path, args: &[&str]) -> Result<(), CliError> {
    let mut argv = vec!["ipsbell", "--out-dir", dir.to_str().unwrap()];
    argv.extend_from_slice(args);
    execute(argv)
}

fn ok(dir: &Path, args: &[&str]) {
    if let Err(err) = ipsbell(dir, args) {
        panic!("{args:?}: {err}");
    }
}

/// Data rows of a CSV written by the CLI.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], index: usize) -> Vec<f64> {
    rows.iter().map(|row| row[index].parse().unwrap()).collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn twin_beam_at_origin_gives_two() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["bell", "--family", "twb", "--param", "B", "--j", "0", "--r", "0.3"]);
    let rows = csv_rows(&dir.path().join("bell.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "twb");
    assert_eq!(rows[0][1], "");
    assert!((column(&rows, 5)[0] - 2.0).abs() < 1e-12);
}

#[test]
fn csv_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["bell", "--family", "ips", "--tau-eff", "0.99", "--j", "0.01", "--r", "0.1,0.2"]);
    let text = std::fs::read_to_string(dir.path().join("bell.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# ipsbell "));
    assert_eq!(lines[1], "# command: bell");
    let config: Value = serde_json::from_str(lines[2].trim_start_matches("# config: ")).unwrap();
    assert_eq!(config["tau_eff"], 0.99);
    assert_eq!(config["family"], "ips");
    assert_eq!(lines[3], "family,tau_eff,J,r,parameterization,value");
    assert_eq!(lines.len(), 6);
}

#[test]
fn validation_errors_exit_two_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["bell", "--family", "ips"][..],
        &["bell", "--r-points", "1"],
        &["bell", "--family", "ips", "--tau-eff", "1.5"],
        &["bell", "--no-such-flag"],
        &["homodyne", "--tanh-r", "1.0"],
        &["wigner-grid", "--family", "twb", "--oracle"],
        &["wigner-grid", "--family", "ips"],
        &["oracle-check", "--r", "0.7"],
        &["oracle-check", "--tau", "-0.1"],
    ] {
        let err = ipsbell(dir.path(), args).unwrap_err();
        assert_eq!(err.code, 2, "{args:?}: {err}");
        let line = err.to_string();
        assert!(!line.contains('\n') && line.starts_with(&format!("{}: ", err.kind)), "{args:?}: {line}");
    }
}

#[test]
fn oracle_check_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    ok(dir.path(), &["oracle-check", "--out", report.to_str().unwrap()]);
    let s = read_json(&report);
    assert_eq!(s["pass"], true);
    for key in ["max_abs_dw", "rel_dp11", "povm_residual", "tau_eff_p11_residual", "tau_eff_trace_distance"] {
        assert!(s[key].as_f64().unwrap() < 1e-6, "{key}");
    }

    ok(dir.path(), &["oracle-check", "--r", "0", "--out", report.to_str().unwrap()]);
    assert_eq!(read_json(&report)["expected_error"], "zero-click-probability");

    let err = ipsbell(dir.path(), &["oracle-check", "--corrupt-coefficient", "1e-4"]).unwrap_err();
    assert_eq!(err.code, 1);
    assert!(err.to_string().starts_with("check-failed: max_abs_dw"));
}

#[test]
fn oracle_check_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let state_path = dir.path().join("state.json");
    let coeffs_path = dir.path().join("coeffs.json");
    ok(
        dir.path(),
        &["oracle-check", "--dump-state", state_path.to_str().unwrap(), "--dump-coeffs", coeffs_path.to_str().unwrap()],
    );
    let record: GaussianSumRecord = serde_json::from_value(read_json(&state_path)).unwrap();
    assert_eq!(record.terms.len(), 4);
    let state = TwoModeGaussianSum::from(&record);
    assert!((state.total_integral().unwrap() - 1.0).abs() < 1e-6);
    assert!(state.evaluate(&PhasePoint::real(0.6, -0.6)) < 0.0);
    let coeffs = read_json(&coeffs_path);
    assert_eq!(coeffs.as_array().unwrap().len(), 4);
    assert_eq!(coeffs[3]["j"], 4);
}

#[test]
fn vacuum_slice() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["wigner-grid", "--family", "vacuum", "--points", "21"]);
    let rows = csv_rows(&dir.path().join("wigner_grid.csv"));
    assert_eq!(rows.len(), 441);
    let w = column(&rows, 2);
    assert!(w.iter().all(|&v| v > 0.0));
    let peak = 4.0 / std::f64::consts::PI.powi(2);
    assert!((w[220] - peak).abs() < 1e-11);
    assert_eq!((column(&rows, 0)[220], column(&rows, 1)[220]), (0.0, 0.0));
    assert!(w.iter().all(|&v| v <= w[220]));
}

#[test]
fn subtracted_slice_is_negative() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["wigner-grid", "--family", "ips", "--r", "0.3", "--tau-eff", "0.99"]);
    let w = column(&csv_rows(&dir.path().join("wigner_grid.csv")), 2);
    assert!(w.iter().copied().fold(f64::INFINITY, f64::min) < -1e-4);
}

#[test]
fn slice_oracle_column() {
    let dir = tempfile::tempdir().unwrap();
    for family in [&["--family", "twb"][..], &["--family", "ips", "--tau", "0.9", "--eta", "0.7"]] {
        let mut args = vec!["wigner-grid", "--oracle", "--x-min", "-1", "--x-max", "1", "--points", "9"];
        args.extend_from_slice(family);
        ok(dir.path(), &args);
        let rows = csv_rows(&dir.path().join("wigner_grid.csv"));
        assert_eq!(rows[0].len(), 4);
        for (w, wf) in column(&rows, 2).iter().zip(column(&rows, 3)) {
            assert!((w - wf).abs() < 1e-6, "{family:?}");
        }
    }
}

#[test]
fn homodyne_rows() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["homodyne", "--family", "twb,ips", "--tau-eff", "0.99", "--tanh-points", "40"]);
    let rows = csv_rows(&dir.path().join("homodyne.csv"));
    assert_eq!(rows.len(), 80);
    let s = column(&rows, 4);
    assert!(s[..40].iter().all(|&v| v <= 2.0));
    assert!(s[40..].iter().any(|&v| v > 2.0));

    let out = dir.path().join("zero.csv");
    ok(dir.path(), &["homodyne", "--family", "ips", "--tanh-r", "0,0.5", "--out", out.to_str().unwrap()]);
    let rows = csv_rows(&out);
    assert_eq!(column(&rows, 3)[0], 0.0);
    assert_eq!(column(&rows, 4)[0], 0.0);
    assert!(column(&rows, 4)[1] > 2.0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["homodyne", "--family", "ips", "--tau-eff", "0.99", "--tanh-points", "20", "--eta-h", "1,0.9"];
    ok(a.path(), &args);
    ok(b.path(), &args);
    let fa = std::fs::read(a.path().join("homodyne.csv")).unwrap();
    let fb = std::fs::read(b.path().join("homodyne.csv")).unwrap();
    assert_eq!(fa, fb);
}
