//! Sign-binned homodyne CHSH test.
//!
//! Measuring `x_theta = Re(alpha e^{-i theta})` on mode a and `x_phi` on
//! mode b turns each Gaussian term of the Wigner function into one zero-mean
//! bivariate normal component. With `D = u v - t^2` the component of term
//! `{w, u, v, t}` has
//!
//! ```text
//! weight = w pi^2 / D,  var_a = v / (2D),  var_b = u / (2D),  cov = t cos(theta + phi) / (2D)
//! ```
//!
//! and the orthant identity gives `E = sum weight (2/pi) asin(cov / sqrt(var_a var_b))`.
//! Homodyne inefficiency `eta_h` is a loss beam splitter before the detector,
//! i.e. Gaussian smearing of both quadratures by `(1 - eta_h) / (4 eta_h)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{sig12, Family};
use crate::error::{check_finite, Error, Result};
use crate::phase_space::TwoModeGaussianSum;
use crate::real::{self, real, sum_accurate, to_f64, Real};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HomodyneAngles {
    pub theta1: f64,
    pub theta2: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl HomodyneAngles {
    pub const CANONICAL: HomodyneAngles = HomodyneAngles {
        theta1: 0.0,
        theta2: std::f64::consts::FRAC_PI_2,
        phi1: -std::f64::consts::FRAC_PI_4,
        phi2: std::f64::consts::FRAC_PI_4,
    };

    pub fn validate(&self) -> Result<()> {
        check_finite("theta1", self.theta1)?;
        check_finite("theta2", self.theta2)?;
        check_finite("phi1", self.phi1)?;
        check_finite("phi2", self.phi2)
    }

    /// `(theta, phi)` pairs in the order `11, 12, 21, 22`; the last enters S
    /// with a minus sign.
    pub fn pairs(&self) -> [(f64, f64); 4] {
        [
            (self.theta1, self.phi1),
            (self.theta1, self.phi2),
            (self.theta2, self.phi1),
            (self.theta2, self.phi2),
        ]
    }
}

impl Default for HomodyneAngles {
    fn default() -> Self {
        Self::CANONICAL
    }
}

/// Zero-mean bivariate normal with a possibly negative weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointComponent {
    pub weight: Real,
    pub var_a: Real,
    pub var_b: Real,
    pub cov: Real,
}

impl JointComponent {
    pub fn correlation(&self) -> Real {
        self.cov / (self.var_a * self.var_b).sqrt()
    }

    fn determinant(&self) -> Real {
        self.var_a * self.var_b - self.cov * self.cov
    }

    fn density_at(&self, xa: Real, xb: Real) -> Real {
        let det = self.determinant();
        let q = (self.var_b * xa * xa - real(2.0) * self.cov * xa * xb + self.var_a * xb * xb) / det;
        self.weight * (-(q * real(0.5))).exp() / (real(2.0) * real::PI * det.sqrt())
    }
}

/// Joint distribution of `(x_theta, x_phi)` as a quasi-mixture.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureJoint {
    components: Vec<JointComponent>,
}

impl QuadratureJoint {
    pub fn new(components: Vec<JointComponent>) -> Self {
        QuadratureJoint { components }
    }

    pub fn components(&self) -> &[JointComponent] {
        &self.components
    }

    pub fn total_weight(&self) -> f64 {
        to_f64(sum_accurate(self.components.iter().map(|c| c.weight)))
    }

    /// Smear both quadratures by the noise of a detector of efficiency `eta_h`.
    pub fn with_homodyne_loss(&self, eta_h: f64) -> Result<Self> {
        check_homodyne_efficiency(eta_h)?;
        let extra = (real(1.0) - real(eta_h)) / real(4.0 * eta_h);
        Ok(QuadratureJoint {
            components: self
                .components
                .iter()
                .map(|c| JointComponent {
                    var_a: c.var_a + extra,
                    var_b: c.var_b + extra,
                    ..*c
                })
                .collect(),
        })
    }

    pub fn density(&self, xa: f64, xb: f64) -> f64 {
        let (xa, xb) = (real(xa), real(xb));
        to_f64(sum_accurate(self.components.iter().map(|c| c.density_at(xa, xb))))
    }

    /// Unit total weight, positive variances, and `|cov| <= sqrt(var_a var_b)`
    /// for every positively weighted component.
    pub fn validate(&self) -> Result<()> {
        let total = self.total_weight();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidJoint {
                reason: format!("weights sum to {total}"),
            });
        }
        for (i, c) in self.components.iter().enumerate() {
            if !(c.var_a.0 > 0.0 && c.var_b.0 > 0.0) {
                return Err(Error::InvalidJoint {
                    reason: format!("component {i} has a non-positive variance"),
                });
            }
            if c.weight.0 > 0.0 && c.determinant().0 < 0.0 {
                return Err(Error::InvalidJoint {
                    reason: format!("component {i} has |cov| above sqrt(var_a var_b)"),
                });
            }
        }
        Ok(())
    }

    fn max_spread(&self) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let (a, b, cv) = (to_f64(c.var_a), to_f64(c.var_b), to_f64(c.cov));
                0.5 * (a + b) + (0.25 * (a - b).powi(2) + cv * cv).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Minimum of the density on an `n x n` grid covering six standard
    /// deviations of the widest component; `InvalidJoint` if it dips below
    /// `-1e-10`.
    pub fn check_nonnegative(&self, n: usize) -> Result<f64> {
        let half = 6.0 * self.max_spread().sqrt();
        let axis = crate::bell::linspace(-half, half, n.max(2));
        let min = axis
            .iter()
            .flat_map(|&x| axis.iter().map(move |&y| (x, y)))
            .map(|(x, y)| self.density(x, y))
            .fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::InvalidJoint {
                reason: format!("density reaches {min:e}"),
            });
        }
        Ok(min)
    }
}

fn check_homodyne_efficiency(eta_h: f64) -> Result<()> {
    check_finite("eta_h", eta_h)?;
    if !(eta_h > 0.0 && eta_h <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "eta_h",
            value: eta_h,
            reason: "homodyne efficiency must lie in (0, 1]",
        });
    }
    Ok(())
}

/// Marginal of the Wigner function on `(x_theta, x_phi)`.
pub fn quadrature_joint(state: &TwoModeGaussianSum, theta: f64, phi: f64) -> Result<QuadratureJoint> {
    check_finite("theta", theta)?;
    check_finite("phi", phi)?;
    state.check_integrable()?;
    let cos_sum = real((theta + phi).cos());
    let two = real(2.0);
    Ok(QuadratureJoint {
        components: state
            .terms()
            .iter()
            .map(|term| {
                let det = term.determinant();
                JointComponent {
                    weight: term.mass(),
                    var_a: term.v / (two * det),
                    var_b: term.u / (two * det),
                    cov: term.t * cos_sum / (two * det),
                }
            })
            .collect(),
    })
}

/// `E = <sign(x_a x_b)>` by the per-component orthant identity.
pub fn sign_correlation(joint: &QuadratureJoint) -> f64 {
    to_f64(sum_accurate(
        joint
            .components
            .iter()
            .map(|c| c.weight * real::asin(c.correlation()) / real::FRAC_PI_2),
    ))
}

pub fn correlation(state: &TwoModeGaussianSum, theta: f64, phi: f64, eta_h: f64) -> Result<f64> {
    let joint = quadrature_joint(state, theta, phi)?.with_homodyne_loss(eta_h)?;
    Ok(sign_correlation(&joint))
}

/// `S = E11 + E12 + E21 - E22`.
pub fn bell_s(state: &TwoModeGaussianSum, angles: &HomodyneAngles, eta_h: f64) -> Result<f64> {
    angles.validate()?;
    let [e11, e12, e21, e22] = angles.pairs();
    let e = |(t, p): (f64, f64)| correlation(state, t, p, eta_h);
    Ok(e(e11)? + e(e12)? + e(e21)? - e(e22)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    pub proposals: u64,
    /// Proposals where the density exceeded the envelope bound; should be 0.
    pub envelope_misses: u64,
}

struct PlainComponent {
    weight: f64,
    inv_a: f64,
    inv_b: f64,
    inv_ab: f64,
}

/// Sign average over `samples` exact draws from the joint, by rejection
/// against an isotropic normal envelope twice as wide as the widest
/// component. The envelope constant is the largest density ratio on a
/// grid, with a 20% margin.
pub fn monte_carlo_sign_correlation(joint: &QuadratureJoint, samples: u64, seed: u64) -> Result<MonteCarloEstimate> {
    joint.validate()?;
    if samples == 0 {
        return Err(Error::InvalidParameter {
            name: "samples",
            value: 0.0,
            reason: "need at least one sample",
        });
    }
    let plain: Vec<PlainComponent> = joint
        .components
        .iter()
        .map(|c| {
            let det = to_f64(c.determinant());
            PlainComponent {
                weight: to_f64(c.weight) / (2.0 * std::f64::consts::PI * det.sqrt()),
                inv_a: to_f64(c.var_b) / det,
                inv_b: to_f64(c.var_a) / det,
                inv_ab: to_f64(c.cov) / det,
            }
        })
        .collect();
    let density = |x: f64, y: f64| -> f64 {
        plain
            .iter()
            .map(|c| c.weight * (-0.5 * (c.inv_a * x * x - 2.0 * c.inv_ab * x * y + c.inv_b * y * y)).exp())
            .sum()
    };
    let spread = (2.0 * joint.max_spread()).sqrt();
    let envelope = |x: f64, y: f64| -> f64 {
        (-(x * x + y * y) / (2.0 * spread * spread)).exp() / (2.0 * std::f64::consts::PI * spread * spread)
    };
    let axis = crate::bell::linspace(-8.0 * spread, 8.0 * spread, 401);
    let bound = 1.2
        * axis
            .iter()
            .flat_map(|&x| axis.iter().map(move |&y| (x, y)))
            .map(|(x, y)| density(x, y) / envelope(x, y))
            .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut accepted, mut proposals, mut misses) = (0u64, 0u64, 0u64);
    let mut sign_sum: i64 = 0;
    while accepted < samples {
        let x: f64 = spread * rng.sample::<f64, _>(StandardNormal);
        let y: f64 = spread * rng.sample::<f64, _>(StandardNormal);
        let u: f64 = rng.gen();
        proposals += 1;
        let ratio = density(x, y) / (bound * envelope(x, y));
        if ratio > 1.0 {
            misses += 1;
        }
        if u < ratio {
            accepted += 1;
            sign_sum += if x * y >= 0.0 { 1 } else { -1 };
        }
    }
    let mean = sign_sum as f64 / samples as f64;
    Ok(MonteCarloEstimate {
        mean,
        std_error: ((1.0 - mean * mean).max(0.0) / samples as f64).sqrt(),
        samples,
        proposals,
        envelope_misses: misses,
    })
}

/// One row of a homodyne sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomodyneRecord {
    pub family: &'static str,
    pub tau_eff: Option<f64>,
    pub eta_h: f64,
    pub tanh_r: f64,
    pub s: f64,
}

impl HomodyneRecord {
    pub const CSV_HEADER: &'static str = "family,tau_eff,eta_h,tanh_r,S";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.family,
            self.tau_eff.map(sig12).unwrap_or_default(),
            sig12(self.eta_h),
            sig12(self.tanh_r),
            sig12(self.s)
        )
    }
}

/// S on `families x eta_h x r`, in that nesting order. At `r = 0` every
/// family reduces to uncorrelated marginals and S is 0; the photon-subtracted
/// state is defined there only as that limit.
pub fn sweep_s(families: &[Family], eta_h_values: &[f64], r_values: &[f64], angles: &HomodyneAngles) -> Result<Vec<HomodyneRecord>> {
    angles.validate()?;
    for &eta_h in eta_h_values {
        check_homodyne_efficiency(eta_h)?;
    }
    for &r in r_values {
        check_finite("r", r)?;
    }
    let mut out = Vec::with_capacity(families.len() * eta_h_values.len() * r_values.len());
    for family in families {
        let per_r: Vec<Result<Vec<f64>>> = r_values
            .par_iter()
            .map(|&r| {
                if r == 0.0 {
                    return Ok(vec![0.0; eta_h_values.len()]);
                }
                let state = family.state(r)?;
                eta_h_values.iter().map(|&eta_h| bell_s(&state, angles, eta_h)).collect()
            })
            .collect();
        let per_r: Vec<Vec<f64>> = per_r.into_iter().collect::<Result<_>>()?;
        for (ei, &eta_h) in eta_h_values.iter().enumerate() {
            for (ri, &r) in r_values.iter().enumerate() {
                out.push(HomodyneRecord {
                    family: family.name(),
                    tau_eff: family.tau_eff(),
                    eta_h,
                    tanh_r: r.tanh(),
                    s: per_r[ri][ei],
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ips::{ips_wigner, IpsParams};
    use crate::phase_space::{twb_wigner, vacuum_wigner, TwbParams};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn vacuum_marginal() {
        let joint = quadrature_joint(&vacuum_wigner(), 0.3, -1.1).unwrap();
        assert_eq!(joint.components().len(), 1);
        let c = joint.components()[0];
        assert!((to_f64(c.var_a) - 0.25).abs() < 1e-16 && (to_f64(c.var_b) - 0.25).abs() < 1e-16);
        assert_eq!(to_f64(c.cov), 0.0);
        assert_eq!(sign_correlation(&joint), 0.0);
    }

    #[test]
    fn twin_beam_correlation() {
        let r: f64 = 0.6;
        let twb = twb_wigner(&TwbParams::new(r).unwrap());
        let joint = quadrature_joint(&twb, 0.0, 0.0).unwrap();
        assert!((to_f64(joint.components()[0].correlation()) - (2.0 * r).tanh()).abs() < 1e-15);
        for (t, p) in [(0.0, 0.0), (0.2, 0.5), (FRAC_PI_2, -0.4)] {
            let want = 2.0 / PI * ((2.0 * r).tanh() * (t + p).cos()).asin();
            assert!((correlation(&twb, t, p, 1.0).unwrap() - want).abs() < 1e-15);
        }
    }

    #[test]
    fn twin_beam_s_closed_form() {
        for r in [0.0f64, 0.3, 1.0, 2.5] {
            let twb = twb_wigner(&TwbParams::new(r).unwrap());
            let s = bell_s(&twb, &HomodyneAngles::CANONICAL, 1.0).unwrap();
            let want = 8.0 / PI * ((2.0 * r).tanh() / 2f64.sqrt()).asin();
            assert!((s - want).abs() < 1e-14 && s <= 2.0 + 1e-9, "r={r}: {s}");
        }
    }

    #[test]
    fn loss_adds_variance() {
        let joint = quadrature_joint(&vacuum_wigner(), 0.0, 0.0).unwrap().with_homodyne_loss(0.5).unwrap();
        assert!((to_f64(joint.components()[0].var_a) - 0.5).abs() < 1e-16);
        assert!(quadrature_joint(&vacuum_wigner(), 0.0, 0.0).unwrap().with_homodyne_loss(0.0).is_err());
    }

    #[test]
    fn photon_subtracted_joint_is_valid() {
        let state = ips_wigner(&IpsParams::from_tau_eff(0.5, 0.99).unwrap()).unwrap();
        for (t, p) in HomodyneAngles::CANONICAL.pairs() {
            let joint = quadrature_joint(&state, t, p).unwrap();
            joint.validate().unwrap();
            assert!(joint.check_nonnegative(81).unwrap() >= -1e-10);
            assert!(sign_correlation(&joint).abs() <= 1.0);
        }
    }

    #[test]
    fn photon_subtraction_violates() {
        let best = (1..100)
            .map(|i| {
                let r = (i as f64 / 100.0).atanh();
                let state = ips_wigner(&IpsParams::from_tau_eff(r, 0.99).unwrap()).unwrap();
                bell_s(&state, &HomodyneAngles::CANONICAL, 1.0).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(best > 2.0 && best < 2.1, "{best}");
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let joint = quadrature_joint(&twb_wigner(&TwbParams::new(0.4).unwrap()), 0.0, 0.0).unwrap();
        let a = monte_carlo_sign_correlation(&joint, 20_000, 7).unwrap();
        let b = monte_carlo_sign_correlation(&joint, 20_000, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.envelope_misses, 0);
        assert!((a.mean - sign_correlation(&joint)).abs() < 4.0 * a.std_error);
    }

    #[test]
    fn sweep_rows() {
        let rows = sweep_s(
            &[Family::Twb, Family::Ips { tau_eff: 0.99 }],
            &[1.0, 0.9],
            &[0.0, 0.5],
            &HomodyneAngles::CANONICAL,
        )
        .unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].s, 0.0);
        assert_eq!(rows[4].s, 0.0);
        assert_eq!((rows[1].eta_h, rows[2].eta_h), (1.0, 0.9));
        assert_eq!(rows[4].csv_row(), "ips,9.90000000000e-1,1.00000000000e0,0.00000000000e0,0.00000000000e0");
        assert!(sweep_s(&[Family::Twb], &[1.2], &[0.5], &HomodyneAngles::CANONICAL).is_err());
    }
}
