use std::path::{Path, PathBuf};

use clap::Args;
use ipsbell::bell::{linspace, sig12};
use ipsbell::fock::{cutoff_for, ips_apply, twb_state, wigner_from_fock, FockState, MAX_DIM};
use ipsbell::{coefficient_table, ips_wigner, twb_wigner, vacuum_wigner, IpsParams, PhasePoint, TwbParams};
use rayon::prelude::*;
use serde::Serialize;

use super::{check_range, check_resolution, FamilyArg};
use crate::{output, CliError};

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct GridArgs {
    #[arg(long, value_enum, default_value = "ips")]
    family: FamilyArg,

    #[arg(long, default_value_t = 0.3)]
    r: f64,

    /// Effective transmissivity (ips); alternatively give `--tau` and `--eta`.
    #[arg(long, conflicts_with_all = ["tau", "eta"])]
    tau_eff: Option<f64>,

    #[arg(long, requires = "eta")]
    tau: Option<f64>,

    #[arg(long, requires = "tau")]
    eta: Option<f64>,

    #[arg(long, default_value_t = -2.0)]
    x_min: f64,

    #[arg(long, default_value_t = 2.0)]
    x_max: f64,

    #[arg(long, default_value_t = 41)]
    points: usize,

    /// Add a W_fock column from the truncated Fock-space state.
    #[arg(long)]
    oracle: bool,

    #[arg(long)]
    #[serde(skip)]
    dump_state: Option<PathBuf>,

    #[arg(long)]
    #[serde(skip)]
    dump_coeffs: Option<PathBuf>,

    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Summary {
    command: &'static str,
    output: String,
    label: String,
    points: usize,
    min: f64,
    argmin: [f64; 2],
    max: f64,
    argmax: [f64; 2],
    oracle_max_abs_diff: Option<f64>,
}

fn ips_params(args: &GridArgs) -> Result<IpsParams, CliError> {
    match (args.tau_eff, args.tau, args.eta) {
        (Some(t), _, _) => Ok(IpsParams::from_tau_eff(args.r, t)?),
        (None, Some(tau), Some(eta)) => Ok(IpsParams::new(args.r, tau, eta)?),
        _ => Err(CliError::invalid("missing-parameter", "--family ips needs --tau-eff or --tau with --eta")),
    }
}

/// The Fock-space state for the `--oracle` column. The displaced-parity
/// evaluation needs `|2x|^2 <= dim / 4` across the slice.
fn oracle_state(args: &GridArgs, r: f64, params: Option<&IpsParams>) -> Result<FockState, CliError> {
    let reach = args.x_min.abs().max(args.x_max.abs());
    let needed = (16.0 * reach * reach).ceil() as usize;
    let dim = cutoff_for(r)?.max(needed);
    if dim > MAX_DIM {
        return Err(CliError::invalid(
            "cutoff-too-small",
            format!("the slice out to |x| = {reach} needs cutoff {dim}, above {MAX_DIM}; narrow the range"),
        ));
    }
    let rho = twb_state(r, dim)?;
    match params {
        Some(p) => Ok(ips_apply(&rho, p.tau(), p.eta(), dim - 1)?.0),
        None => Ok(rho),
    }
}

pub fn run(args: &GridArgs, out_dir: &Path) -> Result<(), CliError> {
    check_range("x", args.x_min, args.x_max)?;
    check_resolution("points", args.points)?;
    let params = match args.family {
        FamilyArg::Ips => Some(ips_params(args)?),
        _ => None,
    };
    let state = match (args.family, &params) {
        (FamilyArg::Vacuum, _) => vacuum_wigner(),
        (FamilyArg::Twb, _) => twb_wigner(&TwbParams::new(args.r)?),
        (FamilyArg::Ips, Some(p)) => ips_wigner(p)?,
        (FamilyArg::Ips, None) => unreachable!(),
    };
    if let Some(path) = &args.dump_state {
        output::write_json(path, &state.to_record())?;
    }
    if let Some(path) = &args.dump_coeffs {
        match &params {
            Some(p) => output::write_json(path, &coefficient_table(p)?)?,
            None => return Err(CliError::invalid("invalid-parameter", "--dump-coeffs needs --family ips")),
        }
    }
    let fock = if args.oracle {
        let r = if args.family == FamilyArg::Vacuum { 0.0 } else { args.r };
        Some(oracle_state(args, r, params.as_ref())?)
    } else {
        None
    };

    let axis = linspace(args.x_min, args.x_max, args.points);
    let cells: Vec<(f64, f64)> = axis.iter().flat_map(|&x1| axis.iter().map(move |&x2| (x1, x2))).collect();
    let values: Vec<(f64, Option<f64>)> = cells
        .par_iter()
        .map(|&(x1, x2)| {
            let p = PhasePoint::real(x1, x2);
            let w = state.evaluate(&p);
            let w_fock = fock.as_ref().map(|rho| wigner_from_fock(rho, &p)).transpose()?;
            Ok((w, w_fock))
        })
        .collect::<Result<_, ipsbell::Error>>()?;

    let (mut min_i, mut max_i) = (0, 0);
    for (i, (w, _)) in values.iter().enumerate() {
        if *w < values[min_i].0 {
            min_i = i;
        }
        if *w > values[max_i].0 {
            max_i = i;
        }
    }
    let oracle_max_abs_diff = fock.as_ref().map(|_| {
        values
            .iter()
            .map(|(w, wf)| (w - wf.unwrap_or(f64::NAN)).abs())
            .fold(0.0, f64::max)
    });

    let header = if fock.is_some() { "x1,x2,W,W_fock" } else { "x1,x2,W" };
    let rows = cells.iter().zip(&values).map(|(&(x1, x2), &(w, wf))| match wf {
        Some(wf) => format!("{},{},{},{}", sig12(x1), sig12(x2), sig12(w), sig12(wf)),
        None => format!("{},{},{}", sig12(x1), sig12(x2), sig12(w)),
    });
    let path = output::resolve(&args.out, out_dir, "wigner_grid.csv");
    output::write_csv(&path, "wigner-grid", args, header, rows)?;
    output::print_summary(&Summary {
        command: "wigner-grid",
        output: path.display().to_string(),
        label: state.label().to_string(),
        points: values.len(),
        min: values[min_i].0,
        argmin: [cells[min_i].0, cells[min_i].1],
        max: values[max_i].0,
        argmax: [cells[max_i].0, cells[max_i].1],
        oracle_max_abs_diff,
    })
}
