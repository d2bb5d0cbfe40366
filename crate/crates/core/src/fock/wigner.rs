//! Wigner function of a truncated two-mode state via displaced parity,
//! `W(a, b) = (4 / pi^2) Tr[rho P(a) (x) P(b)]` with
//! `P(g) = D(g) (-1)^n D(g)^dagger = D(2g) (-1)^n`.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{FockState, Matrix};
use crate::error::{Error, Result};
use crate::phase_space::PhasePoint;

/// Largest normalized-state truncation mass accepted by [`wigner_from_fock`].
pub const MAX_WIGNER_DEFICIT: f64 = 1e-8;

/// `L_k^(order)(x)` for `k = 0..len`, by the three-term upward recurrence.
pub fn laguerre(len: usize, order: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    out.push(1.0);
    if len == 1 {
        return out;
    }
    out.push(1.0 + order - x);
    for k in 1..len - 1 {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + order - x) * out[k] - (kf + order) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `<m| D(gamma) |n>` for `m, n < dim`.
pub fn displacement_matrix(gamma: Complex64, dim: usize) -> Matrix {
    let x = gamma.norm_sqr();
    let damping = (-0.5 * x).exp();
    let mut out = Matrix::zeros(dim, dim);
    for order in 0..dim {
        let lag = laguerre(dim - order, order as f64, x);
        for (low, l) in lag.iter().enumerate() {
            let high = low + order;
            // sqrt(low! / high!) gamma^order, built one factor at a time.
            let mut below = Complex64::new(damping * l, 0.0);
            let mut above = below;
            for i in (low + 1)..=high {
                let s = (i as f64).sqrt();
                below *= gamma / s;
                above *= -gamma.conj() / s;
            }
            out[(high, low)] = below;
            if order > 0 {
                out[(low, high)] = above;
            }
        }
    }
    out
}

/// Single-mode displaced parity `D(2 gamma) (-1)^n`.
pub fn displaced_parity(gamma: Complex64, dim: usize) -> Matrix {
    let mut m = displacement_matrix(2.0 * gamma, dim);
    for n in (1..dim).step_by(2) {
        for row in 0..dim {
            m[(row, n)] = -m[(row, n)];
        }
    }
    m
}

/// Wigner function of the truncated state at a phase-space point.
///
/// The displaced parity is exact inside the truncated space, so the error is
/// the truncation itself: the state's deficit must stay below
/// [`MAX_WIGNER_DEFICIT`], and the displacement must not reach far into the
/// discarded levels (`|2 alpha|^2, |2 beta|^2 <= dim / 4`).
pub fn wigner_from_fock(state: &FockState, point: &PhasePoint) -> Result<f64> {
    let dim = state.dim();
    if state.trace_deficit() > MAX_WIGNER_DEFICIT {
        return Err(Error::CutoffTooSmall {
            dim,
            reason: format!("truncation mass {:e} exceeds {MAX_WIGNER_DEFICIT:e}", state.trace_deficit()),
        });
    }
    let reach = (4.0 * point.alpha().norm_sqr()).max(4.0 * point.beta().norm_sqr());
    if !point.is_finite() || reach > dim as f64 / 4.0 {
        return Err(Error::CutoffTooSmall {
            dim,
            reason: format!("displacement |2g|^2 = {reach} exceeds dim/4"),
        });
    }
    let pa = displaced_parity(point.alpha(), dim);
    let pb = displaced_parity(point.beta(), dim);
    let rho = state.matrix();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            let row = i * dim + j;
            for k in 0..dim {
                let pa_ki = pa[(k, i)];
                for l in 0..dim {
                    acc += rho[(row, k * dim + l)] * pa_ki * pb[(l, j)];
                }
            }
        }
    }
    Ok(4.0 / (PI * PI) * acc.re)
}
