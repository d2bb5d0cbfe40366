use std::path::{Path, PathBuf};

use clap::Args;
use ipsbell::fock::{cutoff_for, ips_apply, ips_apply_dilation, joint_povm, twb_state, wigner_from_fock, MAX_DIM};
use ipsbell::real::real;
use ipsbell::{click_probability, coefficient_table, ips_wigner, Error, IpsParams, PhasePoint, TwoModeGaussianSum};
use num_complex::Complex64;
use serde::Serialize;

use crate::{output, CliError};

const WIGNER_TOLERANCE: f64 = 1e-6;
const P11_TOLERANCE: f64 = 1e-6;
const POVM_TOLERANCE: f64 = 1e-12;
const REDUCTION_TOLERANCE: f64 = 1e-8;
const MAX_ORACLE_R: f64 = 0.6;

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 0.3)]
    r: f64,

    #[arg(long, default_value_t = 0.9)]
    tau: f64,

    #[arg(long, default_value_t = 1.0)]
    eta: f64,

    /// Fock cutoff per mode; defaults to the tail rule.
    #[arg(long)]
    cutoff: Option<usize>,

    /// Relative perturbation of the first term weight, to exercise the failure path.
    #[arg(long, hide = true)]
    corrupt_coefficient: Option<f64>,

    /// Write the closed-form state as JSON.
    #[arg(long)]
    #[serde(skip)]
    dump_state: Option<PathBuf>,

    /// Write the coefficient table as JSON.
    #[arg(long)]
    #[serde(skip)]
    dump_coeffs: Option<PathBuf>,

    /// Also write the report to this file.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'static str,
    config: &'a OracleArgs,
    cutoff: usize,
    max_abs_dw: f64,
    rel_dp11: f64,
    povm_residual: f64,
    tau_eff: f64,
    tau_eff_p11_residual: f64,
    tau_eff_trace_distance: f64,
    kraus_dilation_trace_distance: f64,
    pass: bool,
    failures: Vec<String>,
}

#[derive(Serialize)]
struct ExpectedErrorReport<'a> {
    command: &'static str,
    config: &'a OracleArgs,
    expected_error: &'static str,
    pass: bool,
}

fn comparison_points() -> Vec<PhasePoint> {
    let axis = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut points: Vec<PhasePoint> = axis
        .iter()
        .flat_map(|&x| axis.iter().map(move |&y| PhasePoint::real(x, y)))
        .collect();
    points.push(PhasePoint::new(Complex64::new(0.2, 0.3), Complex64::new(-0.1, 0.25)));
    points
}

fn corrupt(state: TwoModeGaussianSum, rel: f64) -> TwoModeGaussianSum {
    let mut terms = state.terms().to_vec();
    terms[0] = terms[0].scaled(real(1.0 + rel));
    TwoModeGaussianSum::new(state.label().to_string(), terms)
}

fn check(failures: &mut Vec<String>, name: &str, value: f64, tolerance: f64) {
    if !(value <= tolerance) {
        failures.push(format!("{name} = {value:e} exceeds {tolerance:e}"));
    }
}

pub fn run(args: &OracleArgs, _out_dir: &Path) -> Result<(), CliError> {
    if !(args.r >= 0.0 && args.r <= MAX_ORACLE_R) {
        return Err(CliError::invalid(
            "invalid-parameter",
            format!("r = {} is outside the oracle range [0, {MAX_ORACLE_R}]", args.r),
        ));
    }
    let params = IpsParams::new(args.r, args.tau, args.eta)?;
    let closed = match ips_wigner(&params) {
        Ok(state) => state,
        Err(err @ Error::ZeroClickProbability { .. }) => {
            let report = ExpectedErrorReport {
                command: "oracle-check",
                config: args,
                expected_error: err.kind(),
                pass: true,
            };
            if let Some(path) = &args.out {
                output::write_json(path, &report)?;
            }
            return output::print_summary(&report);
        }
        Err(err) => return Err(err.into()),
    };
    let closed = match args.corrupt_coefficient {
        Some(rel) => corrupt(closed, rel),
        None => closed,
    };
    if let Some(path) = &args.dump_state {
        output::write_json(path, &closed.to_record())?;
    }
    if let Some(path) = &args.dump_coeffs {
        output::write_json(path, &coefficient_table(&params)?)?;
    }

    let dim = match args.cutoff {
        Some(d) if d < 2 || d > MAX_DIM => {
            return Err(CliError::invalid("invalid-parameter", format!("cutoff = {d} must lie in [2, {MAX_DIM}]")))
        }
        Some(d) => d,
        None => cutoff_for(args.r)?,
    };
    let rho = twb_state(args.r, dim)?;
    let (kraus, p11_fock) = ips_apply(&rho, args.tau, args.eta, dim - 1)?;
    let (dilation, _) = ips_apply_dilation(&rho, args.tau, args.eta)?;
    let tau_eff = params.tau_eff();
    let (reduced, p11_reduced) = ips_apply(&rho, tau_eff, 1.0, dim - 1)?;

    let mut max_abs_dw: f64 = 0.0;
    for p in comparison_points() {
        let diff = closed.evaluate(&p) - wigner_from_fock(&kraus, &p)?;
        max_abs_dw = max_abs_dw.max(diff.abs());
    }
    let p11_closed = click_probability(&params)? * closed.total_integral()?;
    let rel_dp11 = (p11_closed - p11_fock).abs() / p11_fock;
    let [e00, e01, e10, e11] = joint_povm(args.eta, dim)?;
    let povm_residual = (0..dim * dim)
        .map(|i| (e00[i] + e01[i] + e10[i] + e11[i] - 1.0).abs())
        .fold(0.0, f64::max);
    let tau_eff_p11_residual = (p11_fock - p11_reduced).abs() / p11_reduced;
    let tau_eff_trace_distance = kraus.trace_distance(&reduced)?;
    let kraus_dilation_trace_distance = kraus.trace_distance(&dilation)?;

    let mut failures = Vec::new();
    check(&mut failures, "max_abs_dw", max_abs_dw, WIGNER_TOLERANCE);
    check(&mut failures, "rel_dp11", rel_dp11, P11_TOLERANCE);
    check(&mut failures, "povm_residual", povm_residual, POVM_TOLERANCE);
    check(&mut failures, "tau_eff_p11_residual", tau_eff_p11_residual, REDUCTION_TOLERANCE);
    check(&mut failures, "tau_eff_trace_distance", tau_eff_trace_distance, REDUCTION_TOLERANCE);
    check(&mut failures, "kraus_dilation_trace_distance", kraus_dilation_trace_distance, REDUCTION_TOLERANCE);

    let report = Report {
        command: "oracle-check",
        config: args,
        cutoff: dim,
        max_abs_dw,
        rel_dp11,
        povm_residual,
        tau_eff,
        tau_eff_p11_residual,
        tau_eff_trace_distance,
        kraus_dilation_trace_distance,
        pass: failures.is_empty(),
        failures,
    };
    if let Some(path) = &args.out {
        output::write_json(path, &report)?;
    }
    output::print_summary(&report)?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::check_failed(report.failures.join("; ")))
    }
}
