//! Centered two-mode Gaussian sums in phase space.
//!
//! Convention: `alpha = x + i p`, and a single-mode vacuum has Wigner function
//! `(2/pi) exp(-2|alpha|^2)`, so each quadrature of the vacuum has variance 1/4.
//! A term `{weight, u, v, t}` stands for
//!
//! ```text
//! weight * exp(-u |alpha|^2 - v |beta|^2 + t (alpha beta + conj(alpha beta)))
//! ```
//!
//! with `alpha beta + c.c. = 2 (x1 x2 - p1 p2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::real::{self, real, sum_accurate, to_f64, Real};

/// A point `(alpha, beta)` of the two-mode phase space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub beta_re: f64,
    pub beta_im: f64,
}

impl PhasePoint {
    pub const ORIGIN: PhasePoint = PhasePoint {
        alpha_re: 0.0,
        alpha_im: 0.0,
        beta_re: 0.0,
        beta_im: 0.0,
    };

    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        PhasePoint {
            alpha_re: alpha.re,
            alpha_im: alpha.im,
            beta_re: beta.re,
            beta_im: beta.im,
        }
    }

    /// Point with both displacements on the real axis.
    pub fn real(alpha: f64, beta: f64) -> Self {
        PhasePoint {
            alpha_re: alpha,
            beta_re: beta,
            ..Self::ORIGIN
        }
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.alpha_re, self.alpha_im)
    }

    pub fn beta(&self) -> Complex64 {
        Complex64::new(self.beta_re, self.beta_im)
    }

    pub fn conj(&self) -> Self {
        PhasePoint {
            alpha_re: self.alpha_re,
            alpha_im: -self.alpha_im,
            beta_re: self.beta_re,
            beta_im: -self.beta_im,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha_re.is_finite()
            && self.alpha_im.is_finite()
            && self.beta_re.is_finite()
            && self.beta_im.is_finite()
    }

    /// `(|alpha|^2, |beta|^2, alpha beta + c.c.)` in double-double precision.
    fn invariants(&self) -> (Real, Real, Real) {
        let (x1, y1) = (real(self.alpha_re), real(self.alpha_im));
        let (x2, y2) = (real(self.beta_re), real(self.beta_im));
        let a2 = x1 * x1 + y1 * y1;
        let b2 = x2 * x2 + y2 * y2;
        let cross = (x1 * x2 - y1 * y2) * real(2.0);
        (a2, b2, cross)
    }
}

/// One centered Gaussian `weight * exp(-u|a|^2 - v|b|^2 + t(ab + c.c.))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianTerm {
    pub weight: Real,
    pub u: Real,
    pub v: Real,
    pub t: Real,
}

impl GaussianTerm {
    pub fn new(weight: f64, u: f64, v: f64, t: f64) -> Self {
        GaussianTerm {
            weight: real(weight),
            u: real(u),
            v: real(v),
            t: real(t),
        }
    }

    /// `u v - t^2`; each of the (x1, x2) and (p1, p2) blocks integrates to
    /// `pi / sqrt(u v - t^2)`.
    pub fn determinant(&self) -> Real {
        self.u * self.v - self.t * self.t
    }

    pub fn is_integrable(&self) -> bool {
        self.u.0 > 0.0 && self.v.0 > 0.0 && self.determinant().0 > 0.0
    }

    /// Integral of the term over the whole phase space.
    pub fn mass(&self) -> Real {
        self.weight * real::PI * real::PI / self.determinant()
    }

    pub(crate) fn value_at(&self, point: (Real, Real, Real)) -> Real {
        let (a2, b2, cross) = point;
        let exponent = self.t * cross - self.u * a2 - self.v * b2;
        self.weight * exponent.exp()
    }

    pub fn scaled(&self, factor: Real) -> Self {
        GaussianTerm {
            weight: self.weight * factor,
            ..*self
        }
    }
}

/// Weighted sum of centered two-mode Gaussians, the common representation
/// of every state handled by the closed-form modules.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeGaussianSum {
    label: String,
    terms: Vec<GaussianTerm>,
}

impl TwoModeGaussianSum {
    pub fn new(label: impl Into<String>, terms: Vec<GaussianTerm>) -> Self {
        TwoModeGaussianSum {
            label: label.into(),
            terms,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn evaluate(&self, point: &PhasePoint) -> f64 {
        to_f64(self.evaluate_extended(point))
    }

    pub fn evaluate_extended(&self, point: &PhasePoint) -> Real {
        let inv = point.invariants();
        sum_accurate(self.terms.iter().map(|term| term.value_at(inv)))
    }

    /// Integral over phase space; equals one for a normalized state.
    pub fn total_integral(&self) -> Result<f64> {
        self.total_integral_extended().map(to_f64)
    }

    pub fn total_integral_extended(&self) -> Result<Real> {
        self.check_integrable()?;
        Ok(sum_accurate(self.terms.iter().map(GaussianTerm::mass)))
    }

    /// Sum of the absolute term masses divided by the net mass: how much the
    /// terms cancel. One for a Gaussian; large for strongly subtracted states.
    pub fn cancellation_factor(&self) -> Result<f64> {
        let net = self.total_integral_extended()?;
        let gross = sum_accurate(self.terms.iter().map(|t| t.mass().abs()));
        Ok(to_f64(gross / net.abs()))
    }

    pub fn check_integrable(&self) -> Result<()> {
        for (index, term) in self.terms.iter().enumerate() {
            if !term.is_integrable() {
                return Err(Error::NonIntegrableTerm {
                    index,
                    det: to_f64(term.determinant()),
                });
            }
        }
        Ok(())
    }

    /// Rescale all weights so the total integral is one.
    pub fn normalized(&self) -> Result<Self> {
        let mass = self.total_integral_extended()?;
        Ok(TwoModeGaussianSum {
            label: self.label.clone(),
            terms: self.terms.iter().map(|t| t.scaled(mass.recip())).collect(),
        })
    }

    pub fn to_record(&self) -> GaussianSumRecord {
        GaussianSumRecord {
            label: self.label.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| TermRecord {
                    weight: to_f64(t.weight),
                    u: to_f64(t.u),
                    v: to_f64(t.v),
                    t: to_f64(t.t),
                })
                .collect(),
        }
    }
}

/// JSON form of a [`TwoModeGaussianSum`], rounded to `f64`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSumRecord {
    pub label: String,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub weight: f64,
    pub u: f64,
    pub v: f64,
    pub t: f64,
}

impl From<&GaussianSumRecord> for TwoModeGaussianSum {
    fn from(record: &GaussianSumRecord) -> Self {
        TwoModeGaussianSum::new(
            record.label.clone(),
            record
                .terms
                .iter()
                .map(|t| GaussianTerm::new(t.weight, t.u, t.v, t.t))
                .collect(),
        )
    }
}

/// Twin-beam squeezing parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwbParams {
    r: f64,
    cosh_2r: Real,
    sinh_2r: Real,
}

impl TwbParams {
    pub fn new(r: f64) -> Result<Self> {
        check_finite("r", r)?;
        if r < 0.0 {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "squeezing must be non-negative",
            });
        }
        let two_r = real(2.0 * r);
        Ok(TwbParams {
            r,
            cosh_2r: real::cosh(two_r),
            sinh_2r: real::sinh(two_r),
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `tanh r`, the Fock-basis amplitude ratio.
    pub fn lambda(&self) -> f64 {
        self.r.tanh()
    }

    /// `A = cosh 2r`.
    pub fn big_a(&self) -> f64 {
        to_f64(self.cosh_2r)
    }

    /// `B = sinh 2r`.
    pub fn big_b(&self) -> f64 {
        to_f64(self.sinh_2r)
    }

    pub(crate) fn big_a_extended(&self) -> Real {
        self.cosh_2r
    }

    pub(crate) fn big_b_extended(&self) -> Real {
        self.sinh_2r
    }

    /// `1 - A = -2 sinh^2 r`, without the cancellation of the direct form.
    pub(crate) fn one_minus_a_extended(&self) -> Real {
        let s = real::sinh(real(self.r));
        -(s * s) * real(2.0)
    }
}

/// Gaussian Wigner function of the twin beam,
/// `(4/pi^2) exp(-2A(|a|^2+|b|^2) + 2B(ab + c.c.))`.
pub fn twb_wigner(params: &TwbParams) -> TwoModeGaussianSum {
    let two = real(2.0);
    let a = params.big_a_extended();
    let b = params.big_b_extended();
    // det / pi^2 == 4 / pi^2; this form normalizes the term to working precision.
    let det = (a * a - b * b) * real(4.0);
    let weight = det / (real::PI * real::PI);
    TwoModeGaussianSum::new(
        format!("twb r={}", params.r()),
        vec![GaussianTerm {
            weight,
            u: two * a,
            v: two * a,
            t: two * b,
        }],
    )
}

/// The two-mode vacuum, `(4/pi^2) exp(-2|a|^2 - 2|b|^2)`.
pub fn vacuum_wigner() -> TwoModeGaussianSum {
    twb_wigner(&TwbParams::new(0.0).expect("r = 0 is valid")).with_label("vacuum")
}
