use std::path::{Path, PathBuf};

use clap::Args;
use ipsbell::bell::linspace;
use ipsbell::homodyne::sweep_s;
use ipsbell::{monte_carlo_sign_correlation, quadrature_joint, Family, HomodyneAngles, HomodyneRecord};
use serde::Serialize;

use super::{check_range, check_resolution, family, FamilyArg};
use crate::{output, CliError};

#[derive(Args, Debug, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct HomodyneArgs {
    /// State families, comma separated. `ips` expands over every `--tau-eff`.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "twb,ips")]
    family: Vec<FamilyArg>,

    #[arg(long, value_delimiter = ',', default_value = "0.99")]
    tau_eff: Vec<f64>,

    /// Homodyne detector efficiencies.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    eta_h: Vec<f64>,

    /// Explicit tanh r values; replaces the linear grid.
    #[arg(long, value_delimiter = ',')]
    tanh_r: Vec<f64>,

    #[arg(long, default_value_t = 0.0)]
    tanh_min: f64,

    #[arg(long, default_value_t = 0.99)]
    tanh_max: f64,

    #[arg(long, default_value_t = 100)]
    tanh_points: usize,

    #[arg(long, default_value_t = HomodyneAngles::CANONICAL.theta1)]
    theta1: f64,

    #[arg(long, default_value_t = HomodyneAngles::CANONICAL.theta2)]
    theta2: f64,

    #[arg(long, default_value_t = HomodyneAngles::CANONICAL.phi1)]
    phi1: f64,

    #[arg(long, default_value_t = HomodyneAngles::CANONICAL.phi2)]
    phi2: f64,

    /// Monte Carlo samples per correlation at each curve maximum (0 skips it).
    #[arg(long, default_value_t = 0)]
    mc_samples: u64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct MonteCarloSummary {
    s: f64,
    std_error: f64,
    samples: u64,
    envelope_misses: u64,
}

#[derive(Serialize)]
struct Curve {
    family: &'static str,
    tau_eff: Option<f64>,
    eta_h: f64,
    max_s: f64,
    argmax_tanh_r: f64,
    monte_carlo: Option<MonteCarloSummary>,
}

#[derive(Serialize)]
struct Summary {
    command: &'static str,
    output: String,
    rows: usize,
    curves: Vec<Curve>,
}

fn families(args: &HomodyneArgs) -> Result<Vec<Family>, CliError> {
    let mut out = Vec::new();
    for &arg in &args.family {
        if arg == FamilyArg::Ips {
            if args.tau_eff.is_empty() {
                return Err(CliError::invalid("missing-parameter", "--family ips needs --tau-eff"));
            }
            for &t in &args.tau_eff {
                out.push(family(arg, Some(t))?);
            }
        } else {
            out.push(family(arg, None)?);
        }
    }
    Ok(out)
}

fn monte_carlo_s(
    family: Family,
    r: f64,
    eta_h: f64,
    angles: &HomodyneAngles,
    samples: u64,
    seed: u64,
) -> Result<MonteCarloSummary, CliError> {
    let state = family.state(r)?;
    let (mut s, mut variance, mut misses) = (0.0, 0.0, 0);
    for (i, (theta, phi)) in angles.pairs().into_iter().enumerate() {
        let joint = quadrature_joint(&state, theta, phi)?.with_homodyne_loss(eta_h)?;
        let est = monte_carlo_sign_correlation(&joint, samples, seed.wrapping_add(i as u64))?;
        let sign = if i == 3 { -1.0 } else { 1.0 };
        s += sign * est.mean;
        variance += est.std_error * est.std_error;
        misses += est.envelope_misses;
    }
    Ok(MonteCarloSummary {
        s,
        std_error: variance.sqrt(),
        samples,
        envelope_misses: misses,
    })
}

pub fn run(args: &HomodyneArgs, out_dir: &Path) -> Result<(), CliError> {
    let families = families(args)?;
    let angles = HomodyneAngles {
        theta1: args.theta1,
        theta2: args.theta2,
        phi1: args.phi1,
        phi2: args.phi2,
    };
    let tanh_values = if args.tanh_r.is_empty() {
        check_range("tanh_r", args.tanh_min, args.tanh_max)?;
        check_resolution("tanh_points", args.tanh_points)?;
        linspace(args.tanh_min, args.tanh_max, args.tanh_points)
    } else {
        args.tanh_r.clone()
    };
    for &t in &tanh_values {
        if !(0.0..1.0).contains(&t) {
            return Err(CliError::invalid("invalid-parameter", format!("tanh_r = {t} must lie in [0, 1)")));
        }
    }
    let r_values: Vec<f64> = tanh_values.iter().map(|t| t.atanh()).collect();

    let rows = sweep_s(&families, &args.eta_h, &r_values, &angles)?;

    let mut curves = Vec::new();
    for (chunk, (family, eta_h)) in rows
        .chunks(r_values.len())
        .zip(families.iter().flat_map(|f| args.eta_h.iter().map(move |&e| (*f, e))))
    {
        let (best_index, best) = chunk
            .iter()
            .enumerate()
            .fold((0, &chunk[0]), |acc, (i, row)| if row.s > acc.1.s { (i, row) } else { acc });
        let monte_carlo = if args.mc_samples > 0 && r_values[best_index] > 0.0 {
            Some(monte_carlo_s(family, r_values[best_index], eta_h, &angles, args.mc_samples, args.seed)?)
        } else {
            None
        };
        curves.push(Curve {
            family: best.family,
            tau_eff: best.tau_eff,
            eta_h,
            max_s: best.s,
            argmax_tanh_r: best.tanh_r,
            monte_carlo,
        });
    }

    let path = output::resolve(&args.out, out_dir, "homodyne.csv");
    output::write_csv(&path, "homodyne", args, HomodyneRecord::CSV_HEADER, rows.iter().map(HomodyneRecord::csv_row))?;
    output::print_summary(&Summary {
        command: "homodyne",
        output: path.display().to_string(),
        rows: rows.len(),
        curves,
    })
}
