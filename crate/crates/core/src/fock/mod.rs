//! Brute-force reference in a truncated two-mode Fock space.
//!
//! Density matrices are dense `d^2 x d^2` complex matrices in the
//! lexicographic basis `|n, m>` with index `n * d + m`. Everything here is
//! written for clarity over speed; it exists to check the closed forms.

mod maps;
mod wigner;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_finite, Error, Result};
use crate::phase_space::TwbParams;

pub use maps::{ips_apply, ips_apply_dilation, kraus_terms, KrausTerm};
pub use wigner::{displacement_matrix, displaced_parity, laguerre, wigner_from_fock};

/// Tail mass below which a truncated twin beam counts as converged.
pub const TAIL_BOUND: f64 = 1e-12;
pub const MIN_DIM: usize = 16;
/// Largest per-mode cutoff the dense oracle accepts.
pub const MAX_DIM: usize = 48;

pub type Matrix = DMatrix<Complex64>;

#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    dim: usize,
    matrix: Matrix,
    trace_deficit: f64,
}

impl FockState {
    pub fn new(dim: usize, matrix: Matrix, trace_deficit: f64) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::CutoffTooSmall {
                dim,
                reason: format!("matrix is {}x{}, expected {}^2 square", matrix.nrows(), matrix.ncols(), dim),
            });
        }
        Ok(FockState {
            dim,
            matrix,
            trace_deficit,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Bound on the probability mass lost to truncation.
    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn element(&self, row: (usize, usize), col: (usize, usize)) -> Complex64 {
        self.matrix[(row.0 * self.dim + row.1, col.0 * self.dim + col.1)]
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if !(tr > 1e-300) {
            return Err(Error::ZeroClickProbability { p11: tr });
        }
        Ok(FockState {
            dim: self.dim,
            matrix: self.matrix.unscale(tr),
            trace_deficit: self.trace_deficit / tr,
        })
    }

    /// Largest `|rho - rho^dagger|` entry.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Hermitian to 1e-12 and no eigenvalue below -1e-10.
    pub fn is_valid(&self) -> bool {
        self.hermiticity_residual() <= 1e-12 && self.min_eigenvalue() >= -1e-10
    }

    pub fn trace_distance(&self, other: &FockState) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::CutoffTooSmall {
                dim: self.dim.min(other.dim),
                reason: format!("cannot compare cutoffs {} and {}", self.dim, other.dim),
            });
        }
        let diff = &self.matrix - &other.matrix;
        Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>())
    }
}

/// Spectrum of the Hermitian part, ascending. Rows and columns that vanish
/// identically are split off first as zero eigenvalues; the dense solver
/// returns NaN on sparse input like the truncated twin beam.
fn hermitian_eigenvalues(m: &Matrix) -> Vec<f64> {
    let herm = (m + m.adjoint()).scale(0.5);
    let n = herm.nrows();
    let support: Vec<usize> = (0..n)
        .filter(|&i| herm.row(i).iter().any(|z| *z != Complex64::new(0.0, 0.0)))
        .collect();
    let mut values: Vec<f64> = if support.is_empty() {
        Vec::new()
    } else {
        let block = Matrix::from_fn(support.len(), support.len(), |i, j| herm[(support[i], support[j])]);
        block.symmetric_eigenvalues().iter().copied().collect()
    };
    values.resize(n, 0.0);
    values.sort_by(f64::total_cmp);
    values
}

/// Smallest cutoff `d` with `(tanh r)^(2d) < 1e-12`, but at least 16.
pub fn cutoff_for(r: f64) -> Result<usize> {
    let params = TwbParams::new(r)?;
    let lambda = params.lambda();
    let mut dim = MIN_DIM;
    while lambda.powi(2 * dim as i32) >= TAIL_BOUND {
        dim += 1;
        if dim > MAX_DIM {
            return Err(Error::CutoffTooSmall {
                dim: MAX_DIM,
                reason: format!("r = {r} needs more than {MAX_DIM} levels per mode"),
            });
        }
    }
    Ok(dim)
}

/// Truncated twin beam `sqrt(1 - l^2) sum_n l^n |n, n>`, not renormalized.
pub fn twb_state(r: f64, dim: usize) -> Result<FockState> {
    let params = TwbParams::new(r)?;
    let lambda = params.lambda();
    let tail = lambda.powi(2 * dim as i32);
    if tail >= TAIL_BOUND {
        return Err(Error::CutoffTooSmall {
            dim,
            reason: format!("tail mass {tail:e} exceeds {TAIL_BOUND:e}"),
        });
    }
    let norm = (1.0 - lambda * lambda).sqrt();
    let amplitudes: Vec<f64> = (0..dim).map(|n| norm * lambda.powi(n as i32)).collect();
    let mut matrix = Matrix::zeros(dim * dim, dim * dim);
    for (n, an) in amplitudes.iter().enumerate() {
        for (k, ak) in amplitudes.iter().enumerate() {
            matrix[(n * dim + n, k * dim + k)] = Complex64::new(an * ak, 0.0);
        }
    }
    FockState::new(dim, matrix, tail)
}

/// Diagonals of the single-detector on/off POVM.
#[derive(Clone, Debug, PartialEq)]
pub struct OnOffPovm {
    pub no_click: Vec<f64>,
    pub click: Vec<f64>,
}

/// `Pi0 = sum_j (1 - eta)^j |j><j|`, `Pi1 = 1 - Pi0`.
pub fn on_off_povm(eta: f64, dim: usize) -> Result<OnOffPovm> {
    check_efficiency(eta)?;
    let no_click: Vec<f64> = (0..dim).map(|j| (1.0 - eta).powi(j as i32)).collect();
    let click = no_click.iter().map(|p| 1.0 - p).collect();
    Ok(OnOffPovm { no_click, click })
}

/// The four joint outcomes `[00, 01, 10, 11]` as diagonals over `|n, m>`.
pub fn joint_povm(eta: f64, dim: usize) -> Result<[Vec<f64>; 4]> {
    let single = on_off_povm(eta, dim)?;
    let outer = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
    };
    Ok([
        outer(&single.no_click, &single.no_click),
        outer(&single.no_click, &single.click),
        outer(&single.click, &single.no_click),
        outer(&single.click, &single.click),
    ])
}

fn check_efficiency(eta: f64) -> Result<()> {
    check_finite("eta", eta)?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            reason: "efficiency must lie in [0, 1]",
        });
    }
    Ok(())
}

fn check_transmissivity(tau: f64) -> Result<()> {
    check_finite("tau", tau)?;
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: tau,
            reason: "transmissivity must lie in (0, 1]",
        });
    }
    Ok(())
}
