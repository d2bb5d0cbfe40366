use std::path::{Path, PathBuf};

use clap::Args;
use ipsbell::bell::{linspace, maximize_bell, sweep, SearchBox, SweepRecord};
use ipsbell::Parameterization;
use serde::Serialize;

use super::{check_range, check_resolution, family, FamilyArg, ParamArg};
use crate::{output, CliError};

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct BellArgs {
    #[arg(long, value_enum, default_value = "twb")]
    family: FamilyArg,

    /// Effective transmissivity of the subtraction stage (ips only).
    #[arg(long)]
    tau_eff: Option<f64>,

    #[arg(long, value_enum, default_value = "B")]
    param: ParamArg,

    /// Explicit J values, comma separated. Replaces the log grid.
    #[arg(long, value_delimiter = ',')]
    j: Vec<f64>,

    #[arg(long, default_value_t = 1e-4)]
    j_min: f64,

    #[arg(long, default_value_t = 1e-1)]
    j_max: f64,

    #[arg(long, default_value_t = 7)]
    j_points: usize,

    /// Explicit squeezing values, comma separated. Replaces the linear grid.
    #[arg(long, value_delimiter = ',')]
    r: Vec<f64>,

    #[arg(long, default_value_t = 0.05)]
    r_min: f64,

    #[arg(long, default_value_t = 2.0)]
    r_max: f64,

    #[arg(long, default_value_t = 40)]
    r_points: usize,

    /// Also search the box J in [1e-6, 1], r in [0, 2] for the maximum.
    /// A single `--j` or `--r` value pins that coordinate.
    #[arg(long)]
    maximize: bool,

    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Curve {
    #[serde(rename = "J")]
    j: f64,
    max: f64,
    argmax_r: f64,
}

#[derive(Serialize)]
struct OptimumSummary {
    value: f64,
    r: f64,
    #[serde(rename = "J")]
    j: f64,
    exceeds_cirelson: bool,
}

#[derive(Serialize)]
struct Summary {
    command: &'static str,
    output: String,
    family: &'static str,
    tau_eff: Option<f64>,
    param: &'static str,
    rows: usize,
    max: f64,
    curves: Vec<Curve>,
    optimum: Option<OptimumSummary>,
}

pub fn run(args: &BellArgs, out_dir: &Path) -> Result<(), CliError> {
    let family = family(args.family, args.tau_eff)?;
    let param: Parameterization = args.param.into();

    let j_values = if args.j.is_empty() {
        check_range("J", args.j_min, args.j_max)?;
        check_resolution("j_points", args.j_points)?;
        if args.j_min <= 0.0 {
            return Err(CliError::invalid("invalid-parameter", "the J log grid needs j_min > 0"));
        }
        linspace(args.j_min.log10(), args.j_max.log10(), args.j_points)
            .into_iter()
            .map(|lj| 10f64.powf(lj))
            .collect()
    } else {
        args.j.clone()
    };
    let r_values = if args.r.is_empty() {
        check_range("r", args.r_min, args.r_max)?;
        check_resolution("r_points", args.r_points)?;
        linspace(args.r_min, args.r_max, args.r_points)
    } else {
        args.r.clone()
    };

    let rows = sweep(family, param, &j_values, &r_values)?;
    let curves: Vec<Curve> = rows
        .chunks(r_values.len())
        .map(|chunk| {
            let best = chunk
                .iter()
                .fold(&chunk[0], |best, row| if row.value > best.value { row } else { best });
            Curve {
                j: best.j,
                max: best.value,
                argmax_r: best.r,
            }
        })
        .collect();

    let optimum = if args.maximize {
        let mut bounds = SearchBox::default();
        if args.j.len() == 1 {
            bounds = bounds.with_fixed_j(args.j[0]);
        }
        if args.r.len() == 1 {
            bounds = bounds.with_fixed_r(args.r[0]);
        }
        let opt = maximize_bell(family, param, &bounds)?;
        Some(OptimumSummary {
            value: opt.value(),
            r: opt.r,
            j: opt.j,
            exceeds_cirelson: opt.exceeds_cirelson(),
        })
    } else {
        None
    };

    let path = output::resolve(&args.out, out_dir, "bell.csv");
    output::write_csv(&path, "bell", args, SweepRecord::CSV_HEADER, rows.iter().map(SweepRecord::csv_row))?;

    let max = curves.iter().map(|c| c.max).fold(f64::NEG_INFINITY, f64::max);
    output::print_summary(&Summary {
        command: "bell",
        output: path.display().to_string(),
        family: family.name(),
        tau_eff: family.tau_eff(),
        param: param.as_str(),
        rows: rows.len(),
        max,
        curves,
        optimum,
    })
}
