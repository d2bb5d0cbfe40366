//! Displaced-parity CHSH combination on phase-space states.
//!
//! `Bell = P(a1, b1) + P(a2, b1) + P(a1, b2) - P(a2, b2)` with the displaced
//! parity `P = (pi^2 / 4) W`. Local models obey `|Bell| <= 2`.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_finite, Error, Result};
use crate::ips::{ips_wigner, IpsParams};
use crate::phase_space::{twb_wigner, vacuum_wigner, PhasePoint, TwbParams, TwoModeGaussianSum};

/// Parity expectations beyond `1 + PARITY_SLACK` mark an invalid state.
pub const PARITY_SLACK: f64 = 1e-9;
pub const CIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellSettings {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
    pub beta1: Complex64,
    pub beta2: Complex64,
}

impl BellSettings {
    pub fn new(alpha1: Complex64, alpha2: Complex64, beta1: Complex64, beta2: Complex64) -> Self {
        BellSettings {
            alpha1,
            alpha2,
            beta1,
            beta2,
        }
    }

    fn real(alpha1: f64, alpha2: f64, beta1: f64, beta2: f64) -> Self {
        let c = |x| Complex64::new(x, 0.0);
        BellSettings::new(c(alpha1), c(alpha2), c(beta1), c(beta2))
    }

    /// `(a1, b1) = (0, 0)`, `a2 = sqrt J`, `b2 = -sqrt J`.
    pub fn b_of_j(j: f64) -> Self {
        let s = j.sqrt();
        BellSettings::real(0.0, s, 0.0, -s)
    }

    /// `a1 = sqrt J`, `a2 = -3 sqrt J`, `b1 = -sqrt J`, `b2 = 3 sqrt J`.
    pub fn c_of_j(j: f64) -> Self {
        let s = j.sqrt();
        BellSettings::real(s, -3.0 * s, -s, 3.0 * s)
    }

    /// The four points in the order `(a1,b1), (a2,b1), (a1,b2), (a2,b2)`.
    pub fn points(&self) -> [PhasePoint; 4] {
        [
            PhasePoint::new(self.alpha1, self.beta1),
            PhasePoint::new(self.alpha2, self.beta1),
            PhasePoint::new(self.alpha1, self.beta2),
            PhasePoint::new(self.alpha2, self.beta2),
        ]
    }

    pub fn is_finite(&self) -> bool {
        [self.alpha1, self.alpha2, self.beta1, self.beta2]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Parameterization {
    #[serde(rename = "general")]
    General,
    #[serde(rename = "B")]
    BOfJ,
    #[serde(rename = "C")]
    COfJ,
}

impl Parameterization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Parameterization::General => "general",
            Parameterization::BOfJ => "B",
            Parameterization::COfJ => "C",
        }
    }

    pub fn settings(&self, j: f64) -> Option<BellSettings> {
        match self {
            Parameterization::General => None,
            Parameterization::BOfJ => Some(BellSettings::b_of_j(j)),
            Parameterization::COfJ => Some(BellSettings::c_of_j(j)),
        }
    }
}

impl fmt::Display for Parameterization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BellResult {
    pub value: f64,
    pub settings: BellSettings,
    pub state_label: String,
    pub parameterization: Parameterization,
    pub j: Option<f64>,
}

/// `(pi^2 / 4) W(alpha, beta)`, the displaced-parity expectation.
pub fn parity_expectation(state: &TwoModeGaussianSum, point: &PhasePoint) -> Result<f64> {
    let value = std::f64::consts::PI.powi(2) / 4.0 * state.evaluate(point);
    if !(value.abs() <= 1.0 + PARITY_SLACK) {
        return Err(Error::InvalidParity { value });
    }
    Ok(value)
}

pub fn bell_general(state: &TwoModeGaussianSum, settings: &BellSettings) -> Result<BellResult> {
    if !settings.is_finite() {
        return Err(Error::InvalidParameter {
            name: "settings",
            value: f64::NAN,
            reason: "displacements must be finite",
        });
    }
    let [p11, p21, p12, p22] = settings.points();
    let value = parity_expectation(state, &p11)? + parity_expectation(state, &p21)? + parity_expectation(state, &p12)?
        - parity_expectation(state, &p22)?;
    Ok(BellResult {
        value,
        settings: *settings,
        state_label: state.label().to_string(),
        parameterization: Parameterization::General,
        j: None,
    })
}

fn check_j(j: f64) -> Result<()> {
    check_finite("J", j)?;
    if j < 0.0 {
        return Err(Error::InvalidParameter {
            name: "J",
            value: j,
            reason: "must be non-negative",
        });
    }
    Ok(())
}

fn bell_parameterized(state: &TwoModeGaussianSum, j: f64, param: Parameterization) -> Result<BellResult> {
    check_j(j)?;
    let settings = param.settings(j).expect("parameterized family");
    let mut result = bell_general(state, &settings)?;
    result.parameterization = param;
    result.j = Some(j);
    Ok(result)
}

pub fn bell_b(state: &TwoModeGaussianSum, j: f64) -> Result<BellResult> {
    bell_parameterized(state, j, Parameterization::BOfJ)
}

pub fn bell_c(state: &TwoModeGaussianSum, j: f64) -> Result<BellResult> {
    bell_parameterized(state, j, Parameterization::COfJ)
}

/// Family of states indexed by the squeezing `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Vacuum,
    Twb,
    Ips { tau_eff: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Vacuum => "vacuum",
            Family::Twb => "twb",
            Family::Ips { .. } => "ips",
        }
    }

    pub fn tau_eff(&self) -> Option<f64> {
        match self {
            Family::Ips { tau_eff } => Some(*tau_eff),
            _ => None,
        }
    }

    /// The state at squeezing `r` (ignored for the vacuum).
    pub fn state(&self, r: f64) -> Result<TwoModeGaussianSum> {
        match self {
            Family::Vacuum => Ok(vacuum_wigner()),
            Family::Twb => Ok(twb_wigner(&TwbParams::new(r)?)),
            Family::Ips { tau_eff } => ips_wigner(&IpsParams::from_tau_eff(r, *tau_eff)?),
        }
    }
}

/// Search domain for [`maximize_bell`]; equal bounds pin a coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchBox {
    pub r_min: f64,
    pub r_max: f64,
    pub j_min: f64,
    pub j_max: f64,
    pub r_points: usize,
    pub j_points: usize,
}

impl Default for SearchBox {
    fn default() -> Self {
        SearchBox {
            r_min: 0.0,
            r_max: 2.0,
            j_min: 1e-6,
            j_max: 1.0,
            r_points: 81,
            j_points: 49,
        }
    }
}

impl SearchBox {
    pub fn with_fixed_j(mut self, j: f64) -> Self {
        self.j_min = j;
        self.j_max = j;
        self
    }

    pub fn with_fixed_r(mut self, r: f64) -> Self {
        self.r_min = r;
        self.r_max = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("r_min", self.r_min), ("r_max", self.r_max), ("j_min", self.j_min), ("j_max", self.j_max)] {
            check_finite(name, v)?;
        }
        let bad = |name, value, reason| Err(Error::InvalidParameter { name, value, reason });
        if self.r_min < 0.0 || self.r_max < self.r_min {
            return bad("r_max", self.r_max, "need 0 <= r_min <= r_max");
        }
        if self.j_min < 0.0 || self.j_max < self.j_min {
            return bad("j_max", self.j_max, "need 0 <= j_min <= j_max");
        }
        if self.j_min == 0.0 && self.j_max > 0.0 {
            return bad("j_min", 0.0, "a J range is searched in log scale and must start above 0");
        }
        if self.r_points < 2 || self.j_points < 2 {
            return bad("points", self.r_points.min(self.j_points) as f64, "grid resolution must be at least 2");
        }
        Ok(())
    }

    fn r_grid(&self) -> Vec<f64> {
        linspace(self.r_min, self.r_max, if self.r_min == self.r_max { 1 } else { self.r_points })
    }

    fn log_j_grid(&self) -> Vec<f64> {
        if self.j_min == self.j_max {
            return vec![log_j(self.j_min)];
        }
        linspace(self.j_min.log10(), self.j_max.log10(), self.j_points)
    }
}

/// Inclusive evenly spaced grid; the endpoints are exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

// J = 0 is only reachable as a pinned coordinate.
fn log_j(j: f64) -> f64 {
    if j == 0.0 {
        f64::NEG_INFINITY
    } else {
        j.log10()
    }
}

fn j_from_log(lj: f64) -> f64 {
    if lj == f64::NEG_INFINITY {
        0.0
    } else {
        10f64.powf(lj)
    }
}

/// Bell value of `family` at `(r, J)`.
pub fn evaluate_bell(family: Family, param: Parameterization, r: f64, j: f64) -> Result<f64> {
    let state = family.state(r)?;
    bell_parameterized(&state, j, param).map(|b| b.value)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub r: f64,
    pub j: f64,
    pub result: BellResult,
}

impl Optimum {
    pub fn value(&self) -> f64 {
        self.result.value
    }

    /// A maximum beyond `2 sqrt 2` would mean an invalid state upstream.
    pub fn exceeds_cirelson(&self) -> bool {
        self.result.value > CIRELSON_BOUND + 1e-6
    }
}

const START_POINTS: usize = 4;
const MIN_STEP: f64 = 1e-6;

/// Global maximum over the box: log-J by linear-r grid, then compass search
/// in `(r, log10 J)` from the best grid points. Points where the state
/// cannot be built count as minus infinity.
pub fn maximize_bell(family: Family, param: Parameterization, bounds: &SearchBox) -> Result<Optimum> {
    if param == Parameterization::General {
        return Err(Error::InvalidParameter {
            name: "parameterization",
            value: f64::NAN,
            reason: "only the B and C families can be maximized",
        });
    }
    bounds.validate()?;
    let r_grid = bounds.r_grid();
    let lj_grid = bounds.log_j_grid();
    let objective = |r: f64, lj: f64| evaluate_bell(family, param, r, j_from_log(lj)).unwrap_or(f64::NEG_INFINITY);

    let rows: Vec<Vec<(f64, f64, f64)>> = r_grid
        .par_iter()
        .map(|&r| match family.state(r) {
            Ok(state) => lj_grid
                .iter()
                .map(|&lj| {
                    let v = bell_parameterized(&state, j_from_log(lj), param)
                        .map(|b| b.value)
                        .unwrap_or(f64::NEG_INFINITY);
                    (v, r, lj)
                })
                .collect(),
            Err(_) => lj_grid.iter().map(|&lj| (f64::NEG_INFINITY, r, lj)).collect(),
        })
        .collect();
    let mut grid: Vec<(f64, f64, f64)> = rows.into_iter().flatten().collect();
    // Stable sort keeps grid order among ties.
    grid.sort_by(|a, b| b.0.total_cmp(&a.0));
    if !grid[0].0.is_finite() {
        return Err(Error::ZeroClickProbability { p11: 0.0 });
    }

    let r_step = if r_grid.len() > 1 { r_grid[1] - r_grid[0] } else { 0.0 };
    let lj_step = if lj_grid.len() > 1 { lj_grid[1] - lj_grid[0] } else { 0.0 };
    let (r_lo, r_hi) = (bounds.r_min, bounds.r_max);
    let (lj_lo, lj_hi) = (log_j(bounds.j_min), log_j(bounds.j_max));

    let refined: Vec<(f64, f64, f64)> = grid
        .iter()
        .take(START_POINTS)
        .filter(|s| s.0.is_finite())
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&&(v0, r0, lj0)| {
            let (mut best, mut r, mut lj) = (v0, r0, lj0);
            let (mut dr, mut dlj) = (r_step, lj_step);
            while dr >= MIN_STEP || dlj >= MIN_STEP {
                let mut moved = false;
                let candidates = [(r + dr, lj), (r - dr, lj), (r, lj + dlj), (r, lj - dlj)];
                for (cr, clj) in candidates {
                    let cr = cr.clamp(r_lo, r_hi);
                    let clj = if dlj > 0.0 { clj.clamp(lj_lo, lj_hi) } else { lj };
                    if (cr, clj) == (r, lj) {
                        continue;
                    }
                    let v = objective(cr, clj);
                    if v > best {
                        best = v;
                        r = cr;
                        lj = clj;
                        moved = true;
                        break;
                    }
                }
                if !moved {
                    dr *= 0.5;
                    dlj *= 0.5;
                }
            }
            (best, r, lj)
        })
        .collect();

    let (_, r, lj) = refined
        .into_iter()
        .fold((f64::NEG_INFINITY, 0.0, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });
    let j = j_from_log(lj);
    let state = family.state(r)?;
    let result = bell_parameterized(&state, j, param)?;
    Ok(Optimum { r, j, result })
}

/// One row of a Bell sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub family: &'static str,
    pub tau_eff: Option<f64>,
    pub j: f64,
    pub r: f64,
    pub parameterization: Parameterization,
    pub value: f64,
}

impl SweepRecord {
    pub const CSV_HEADER: &'static str = "family,tau_eff,J,r,parameterization,value";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.family,
            self.tau_eff.map(sig12).unwrap_or_default(),
            sig12(self.j),
            sig12(self.r),
            self.parameterization,
            sig12(self.value)
        )
    }
}

/// Twelve significant digits in scientific notation.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Bell values on the `j_values x r_values` grid, ordered by J then r.
pub fn sweep(family: Family, param: Parameterization, j_values: &[f64], r_values: &[f64]) -> Result<Vec<SweepRecord>> {
    for &j in j_values {
        check_j(j)?;
    }
    let per_r: Vec<Result<Vec<f64>>> = r_values
        .par_iter()
        .map(|&r| {
            let state = family.state(r)?;
            j_values
                .iter()
                .map(|&j| bell_parameterized(&state, j, param).map(|b| b.value))
                .collect()
        })
        .collect();
    let per_r: Vec<Vec<f64>> = per_r.into_iter().collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(j_values.len() * r_values.len());
    for (ji, &j) in j_values.iter().enumerate() {
        for (ri, &r) in r_values.iter().enumerate() {
            out.push(SweepRecord {
                family: family.name(),
                tau_eff: family.tau_eff(),
                j,
                r,
                parameterization: param,
                value: per_r[ri][ji],
            });
        }
    }
    Ok(out)
}
