//! Closed-form Wigner function of the twin beam after inconclusive photon
//! subtraction (IPS): each mode is mixed with vacuum on a beam splitter of
//! transmissivity `tau` and the state is kept when both on/off detectors
//! (efficiency `eta`) click.
//!
//! The conditional Wigner function is a four-term Gaussian sum. Row `j` of the
//! coefficient table carries the detector factors `(x_j, y_j, C_j)` and the
//! exponent corrections `(f_j, g_j, h_j)`:
//!
//! ```text
//! k = 2 eta / (2 - eta),  q = 2 / (2 - eta)
//! (x_j, y_j, C_j) = (a, a, 1), (a + k, a, -q), (a, a + k, -q), (a + k, a + k, q^2)
//! D_j = x_j y_j - 4 B^2 (1 - tau)^2,   N_j = 4 tau (1 - tau) / D_j
//! f_j = N_j [x_j (1-A)^2 + 4 B^2 (1-A)(1-tau) + y_j B^2]
//! g_j = N_j [x_j B^2 + 4 B^2 (1-A)(1-tau) + y_j (1-A)^2]
//! h_j = N_j [(x_j + y_j) B (1-A) + 2 B (B^2 + (1-A)^2)(1-tau)]
//! term_j = 16 C_j / (pi^2 D_j) exp(-(b - f_j)|a|^2 - (b - g_j)|b|^2 + (2 B tau + h_j)(ab + c.c.))
//! ```
//!
//! with `a = 2(A(1-tau) + tau)`, `b = 2(A tau + 1 - tau)`, `A = cosh 2r`,
//! `B = sinh 2r`. The double-click probability is the integral of the
//! unnormalized sum. For ideal detectors (`eta = 1`) this reduces to
//! `k = q = 2`; the click probability depends on `(tau, eta)` only through
//! `tau_eff = 1 - eta (1 - tau)`.

use serde::Serialize;

use crate::error::{check_finite, Error, Result};
use crate::phase_space::{GaussianTerm, TwbParams, TwoModeGaussianSum};
use crate::real::{self, real, sum_accurate, to_f64, Real};

/// Largest tolerated ratio of gross to net term mass. Double-double keeps
/// about 32 digits, so this leaves at least 14 in the normalized sum.
pub const MAX_CANCELLATION: f64 = 1e18;

/// Squeezing, beam-splitter transmissivity and detector efficiency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IpsParams {
    tau: f64,
    eta: f64,
    twb: TwbParams,
}

impl IpsParams {
    pub fn new(r: f64, tau: f64, eta: f64) -> Result<Self> {
        let twb = TwbParams::new(r)?;
        check_finite("tau", tau)?;
        check_finite("eta", eta)?;
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
                reason: "transmissivity must lie in (0, 1]",
            });
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                reason: "efficiency must lie in [0, 1]",
            });
        }
        Ok(IpsParams { tau, eta, twb })
    }

    /// Ideal detectors behind a beam splitter of transmissivity `tau_eff`.
    pub fn from_tau_eff(r: f64, tau_eff: f64) -> Result<Self> {
        IpsParams::new(r, tau_eff, 1.0).map_err(|e| match e {
            Error::InvalidParameter { name: "tau", value, reason } => Error::InvalidParameter {
                name: "tau_eff",
                value,
                reason,
            },
            other => other,
        })
    }

    pub fn r(&self) -> f64 {
        self.twb.r()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn twb(&self) -> &TwbParams {
        &self.twb
    }

    pub fn tau_eff(&self) -> f64 {
        1.0 - self.eta * (1.0 - self.tau)
    }

    pub fn big_a(&self) -> f64 {
        self.twb.big_a()
    }

    pub fn big_b(&self) -> f64 {
        self.twb.big_b()
    }

    pub fn a_coef(&self) -> f64 {
        to_f64(self.a_extended())
    }

    pub fn b_coef(&self) -> f64 {
        to_f64(self.b_extended())
    }

    fn reflectivity(&self) -> Real {
        Real::ONE - real(self.tau)
    }

    fn a_extended(&self) -> Real {
        let a = self.twb.big_a_extended();
        (a * self.reflectivity() + real(self.tau)) * real(2.0)
    }

    fn b_extended(&self) -> Real {
        let a = self.twb.big_a_extended();
        (a * real(self.tau) + self.reflectivity()) * real(2.0)
    }

    /// `(k, q) = (2 eta / (2 - eta), 2 / (2 - eta))` from the Wigner function
    /// of the no-click element `(1 - eta)^n`.
    fn detector_factors(&self) -> (Real, Real) {
        let denom = real(2.0) - real(self.eta);
        (real(2.0 * self.eta) / denom, real(2.0) / denom)
    }

    /// True when the double click has probability exactly zero.
    pub fn click_impossible(&self) -> bool {
        self.r() == 0.0 || self.tau == 1.0 || self.eta == 0.0
    }
}

/// One row of the coefficient table, rounded to `f64`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub c: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub n: f64,
}

#[derive(Clone, Copy, Debug)]
struct Row {
    x: Real,
    y: Real,
    c: Real,
    f: Real,
    g: Real,
    h: Real,
    n: Real,
    denom: Real,
}

fn rows(params: &IpsParams) -> Result<[Row; 4]> {
    let big_a = params.twb.big_a_extended();
    let big_b = params.twb.big_b_extended();
    let one_minus_a = params.twb.one_minus_a_extended();
    let eps = params.reflectivity();
    let tau = real(params.tau);
    let a = params.a_extended();
    let (k, q) = params.detector_factors();
    debug_assert!(big_a.0 >= 1.0);

    let b2 = big_b * big_b;
    let oma2 = one_minus_a * one_minus_a;
    let four = real(4.0);
    let cross = four * b2 * one_minus_a * eps;
    let coupling = four * b2 * eps * eps;

    let layout = [(a, a, Real::ONE), (a + k, a, -q), (a, a + k, -q), (a + k, a + k, q * q)];
    let mut out = [Row {
        x: Real::ZERO,
        y: Real::ZERO,
        c: Real::ZERO,
        f: Real::ZERO,
        g: Real::ZERO,
        h: Real::ZERO,
        n: Real::ZERO,
        denom: Real::ONE,
    }; 4];
    for (j, (x, y, c)) in layout.into_iter().enumerate() {
        let denom = x * y - coupling;
        if !(denom.0 > 0.0) {
            return Err(Error::DegenerateDenominator {
                j: j + 1,
                value: to_f64(denom),
            });
        }
        let n = four * tau * eps / denom;
        let f = n * (x * oma2 + cross + y * b2);
        let g = n * (x * b2 + cross + y * oma2);
        let h = n * ((x + y) * big_b * one_minus_a + real(2.0) * big_b * (b2 + oma2) * eps);
        out[j] = Row { x, y, c, f, g, h, n, denom };
    }
    Ok(out)
}

/// The four rows `(x_j, y_j, C_j, f_j, g_j, h_j, N_j)`.
pub fn coefficient_table(params: &IpsParams) -> Result<Vec<CoefficientRow>> {
    Ok(rows(params)?
        .iter()
        .enumerate()
        .map(|(j, row)| CoefficientRow {
            j: j + 1,
            x: to_f64(row.x),
            y: to_f64(row.y),
            c: to_f64(row.c),
            f: to_f64(row.f),
            g: to_f64(row.g),
            h: to_f64(row.h),
            n: to_f64(row.n),
        })
        .collect())
}

/// Unnormalized terms; their total integral is the click probability.
fn click_weighted_terms(params: &IpsParams) -> Result<Vec<GaussianTerm>> {
    let rows = rows(params)?;
    let b = params.b_extended();
    let big_b = params.twb.big_b_extended();
    let tau = real(params.tau);
    let pi2 = real::PI * real::PI;
    let terms: Vec<GaussianTerm> = rows
        .iter()
        .map(|row| GaussianTerm {
            weight: real(16.0) * row.c / (pi2 * row.denom),
            u: b - row.f,
            v: b - row.g,
            t: real(2.0) * big_b * tau + row.h,
        })
        .collect();
    for (index, term) in terms.iter().enumerate() {
        if !term.is_integrable() {
            return Err(Error::NonIntegrableTerm {
                index,
                det: to_f64(term.determinant()),
            });
        }
    }
    Ok(terms)
}

fn click_probability_extended(params: &IpsParams) -> Result<(Real, Vec<GaussianTerm>)> {
    let terms = click_weighted_terms(params)?;
    let p11 = sum_accurate(terms.iter().map(GaussianTerm::mass));
    Ok((p11, terms))
}

/// Probability that both on/off detectors click.
pub fn click_probability(params: &IpsParams) -> Result<f64> {
    if params.click_impossible() {
        return Ok(0.0);
    }
    Ok(to_f64(click_probability_extended(params)?.0))
}

/// Normalized four-term Wigner function of the conditional state.
pub fn ips_wigner(params: &IpsParams) -> Result<TwoModeGaussianSum> {
    if params.click_impossible() {
        return Err(Error::ZeroClickProbability { p11: 0.0 });
    }
    let (p11, terms) = click_probability_extended(params)?;
    if !(p11.0 > 1e-300) {
        return Err(Error::ZeroClickProbability { p11: to_f64(p11) });
    }
    let gross = sum_accurate(terms.iter().map(|t| t.mass().abs()));
    let factor = to_f64(gross / p11);
    if factor > MAX_CANCELLATION {
        return Err(Error::IllConditioned { factor });
    }
    let scale = p11.recip();
    let label = if params.eta == 1.0 {
        format!("ips r={} tau_eff={}", params.r(), params.tau)
    } else {
        format!("ips r={} tau={} eta={}", params.r(), params.tau, params.eta)
    };
    Ok(TwoModeGaussianSum::new(
        label,
        terms.iter().map(|t| t.scaled(scale)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::PhasePoint;

    #[test]
    fn weights_for_ideal_detectors() {
        for (r, tau_eff) in [(0.3, 0.9), (1.0, 0.5), (0.05, 0.999)] {
            let table = coefficient_table(&IpsParams::from_tau_eff(r, tau_eff).unwrap()).unwrap();
            let c: Vec<f64> = table.iter().map(|row| row.c).collect();
            assert_eq!(c, vec![1.0, -2.0, -2.0, 4.0]);
            let a = IpsParams::from_tau_eff(r, tau_eff).unwrap().a_coef();
            assert_eq!(table[0].x, a);
            assert!((table[1].x - (a + 2.0)).abs() < 1e-14 && table[1].y == a);
            assert!((table[3].y - (a + 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn weights_for_lossy_detectors() {
        let p = IpsParams::new(0.4, 0.9, 0.5).unwrap();
        let table = coefficient_table(&p).unwrap();
        let q = 2.0 / 1.5;
        let k = 1.0 / 1.5;
        assert!((table[1].c + q).abs() < 1e-15);
        assert!((table[3].c - q * q).abs() < 1e-15);
        assert!((table[1].x - (p.a_coef() + k)).abs() < 1e-15);
    }

    #[test]
    fn corrections_vanish_without_reflection_or_squeezing() {
        for p in [
            IpsParams::from_tau_eff(0.7, 1.0).unwrap(),
            IpsParams::from_tau_eff(0.0, 0.8).unwrap(),
        ] {
            for row in coefficient_table(&p).unwrap() {
                assert_eq!((row.f, row.g, row.h), (0.0, 0.0, 0.0), "{p:?}");
            }
        }
        // tau_eff -> 1: N_j carries the factor (1 - tau_eff).
        let near = coefficient_table(&IpsParams::from_tau_eff(0.7, 1.0 - 1e-9).unwrap()).unwrap();
        for row in near {
            assert!(row.n.abs() < 1e-8 && row.f.abs() < 1e-8 && row.h.abs() < 1e-8);
        }
    }

    #[test]
    fn invariant_relations_hold() {
        let p = IpsParams::new(0.6, 0.85, 0.7).unwrap();
        let eps = 1.0 - p.tau();
        assert!(p.tau() <= p.tau_eff() && p.tau_eff() <= 1.0);
        assert!((p.a_coef() - 2.0 * (p.big_a() * eps + p.tau())).abs() < 1e-14);
        assert!((p.b_coef() - 2.0 * (p.big_a() * p.tau() + eps)).abs() < 1e-14);
        for row in coefficient_table(&p).unwrap() {
            let denom = row.x * row.y - 4.0 * p.big_b().powi(2) * eps * eps;
            assert!(denom > 0.0);
            assert!((row.n - 4.0 * p.tau() * eps / denom).abs() < 1e-14);
            assert!(row.f.is_finite() && row.g.is_finite() && row.h.is_finite());
        }
    }

    #[test]
    fn click_probability_edge_cases() {
        assert_eq!(click_probability(&IpsParams::from_tau_eff(0.0, 0.9).unwrap()).unwrap(), 0.0);
        assert_eq!(click_probability(&IpsParams::new(0.5, 1.0, 0.7).unwrap()).unwrap(), 0.0);
        assert_eq!(click_probability(&IpsParams::new(0.5, 0.9, 0.0).unwrap()).unwrap(), 0.0);
        let p = click_probability(&IpsParams::from_tau_eff(0.3, 0.9).unwrap()).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn zero_click_is_an_error_for_the_state() {
        for p in [
            IpsParams::from_tau_eff(0.0, 0.9).unwrap(),
            IpsParams::from_tau_eff(0.4, 1.0).unwrap(),
        ] {
            assert!(matches!(ips_wigner(&p), Err(Error::ZeroClickProbability { .. })));
        }
    }

    #[test]
    fn click_probability_depends_on_tau_eff_only() {
        for (tau, eta) in [(0.9, 0.7), (0.8, 0.6), (0.95, 0.3)] {
            let lossy = IpsParams::new(0.45, tau, eta).unwrap();
            let ideal = IpsParams::from_tau_eff(0.45, lossy.tau_eff()).unwrap();
            let (a, b) = (click_probability(&lossy).unwrap(), click_probability(&ideal).unwrap());
            assert!((a - b).abs() / b < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn normalized_over_parameter_grid() {
        for ri in 1..=12 {
            let r = 0.1 * ri as f64;
            for tau_eff in [0.5, 0.7, 0.9, 0.99, 0.999] {
                let w = ips_wigner(&IpsParams::from_tau_eff(r, tau_eff).unwrap()).unwrap();
                let total = w.total_integral().unwrap();
                assert!((total - 1.0).abs() < 1e-8, "r={r} tau_eff={tau_eff}: {total}");
            }
        }
    }

    #[test]
    fn degaussified_state_has_negative_region() {
        let w = ips_wigner(&IpsParams::from_tau_eff(0.3, 0.99).unwrap()).unwrap();
        let mut min = f64::INFINITY;
        let n = 41;
        for i in 0..n {
            for j in 0..n {
                let x = -2.0 + 4.0 * i as f64 / (n - 1) as f64;
                let y = -2.0 + 4.0 * j as f64 / (n - 1) as f64;
                min = min.min(w.evaluate(&PhasePoint::real(x, y)));
            }
        }
        assert!(min < -1e-4, "min = {min}");
    }

    #[test]
    fn click_probability_grows_with_squeezing_and_efficiency() {
        for tau in [0.5, 0.9, 0.99] {
            let mut last = 0.0;
            for ri in 0..=30 {
                let p = click_probability(&IpsParams::new(0.05 * ri as f64, tau, 0.8).unwrap()).unwrap();
                assert!(p >= last, "tau={tau} r={}", 0.05 * ri as f64);
                last = p;
            }
            let mut last = 0.0;
            for ei in 0..=20 {
                let p = click_probability(&IpsParams::new(0.6, tau, 0.05 * ei as f64).unwrap()).unwrap();
                assert!(p >= last);
                last = p;
            }
        }
    }

    #[test]
    fn extreme_cancellation_is_reported() {
        let p = IpsParams::from_tau_eff(1e-6, 0.99999).unwrap();
        assert!(matches!(ips_wigner(&p), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn invalid_parameters() {
        assert!(IpsParams::new(0.3, 0.0, 1.0).is_err());
        assert!(IpsParams::new(0.3, 1.2, 1.0).is_err());
        assert!(IpsParams::new(0.3, 0.9, -0.1).is_err());
        assert!(matches!(
            IpsParams::from_tau_eff(0.3, 1.5),
            Err(Error::InvalidParameter { name: "tau_eff", .. })
        ));
    }
}
