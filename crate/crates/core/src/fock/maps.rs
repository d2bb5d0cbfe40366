//! The conditional photon-subtraction map, built two independent ways.
//!
//! Kraus route: `rho -> sum_{p,q} m_p m_q M_pq rho M_pq^dagger` with
//! `M_pq = a^p b^q (cos phi)^(n_a + n_b)`, `cos^2 phi = tau` and
//! `m_k = tan^(2k) phi [1 - (1 - eta)^k] / k!`.
//!
//! Dilation route: each mode meets a vacuum ancilla on a beam splitter
//! `exp(-phi (a^dagger c - a c^dagger))`, the ancilla is measured with the
//! on/off POVM and traced out. Because the ancilla POVM is diagonal in photon
//! number, this reduces to a sum over the number `k` of reflected photons
//! with amplitudes read off the beam-splitter unitary in each total-number
//! block.
//!
//! Both maps factor into one single-mode map per mode. A term that removes
//! `k` photons only reaches states with `n >= k`, so `max_pq >= dim - 1`
//! makes the Kraus sum exact for the truncated state.

use nalgebra::DMatrix;

use super::{check_efficiency, check_transmissivity, FockState, Matrix};
use crate::error::{Error, Result};

/// One term `m_p m_q M_pq rho M_pq^dagger` of the Kraus sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrausTerm {
    pub p: usize,
    pub q: usize,
    pub weight_p: f64,
    pub weight_q: f64,
}

fn kraus_weight(k: usize, tau: f64, eta: f64) -> f64 {
    let tan2 = (1.0 - tau) / tau;
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    tan2.powi(k as i32) * (1.0 - (1.0 - eta).powi(k as i32)) / factorial
}

pub fn kraus_terms(tau: f64, eta: f64, max_pq: usize) -> Result<Vec<KrausTerm>> {
    check_transmissivity(tau)?;
    check_efficiency(eta)?;
    let weights: Vec<f64> = (1..=max_pq).map(|k| kraus_weight(k, tau, eta)).collect();
    let mut terms = Vec::with_capacity(max_pq * max_pq);
    for p in 1..=max_pq {
        for q in 1..=max_pq {
            terms.push(KrausTerm {
                p,
                q,
                weight_p: weights[p - 1],
                weight_q: weights[q - 1],
            });
        }
    }
    Ok(terms)
}

/// A single-mode operator that lowers the photon number by `shift`:
/// `|n> -> amplitude[n] |n - shift>`.
struct Lowering {
    shift: usize,
    weight: f64,
    amplitude: Vec<f64>,
}

/// `sum_k weight_k L_k rho L_k^dagger` with `L_k` acting on one mode.
fn apply_on_mode(state: &Matrix, dim: usize, mode: usize, ops: &[Lowering]) -> Matrix {
    let mut out = Matrix::zeros(dim * dim, dim * dim);
    let index = |own: usize, other: usize| {
        if mode == 0 {
            own * dim + other
        } else {
            other * dim + own
        }
    };
    for op in ops {
        let k = op.shift;
        if op.weight == 0.0 || k >= dim {
            continue;
        }
        for i in k..dim {
            let ci = op.amplitude[i];
            for l in k..dim {
                let factor = op.weight * ci * op.amplitude[l];
                if factor == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    for m in 0..dim {
                        let v = state[(index(i, j), index(l, m))];
                        out[(index(i - k, j), index(l - k, m))] += v * factor;
                    }
                }
            }
        }
    }
    out
}

fn finish(state: &FockState, unnormalized: Matrix) -> Result<(FockState, f64)> {
    let p11 = unnormalized.trace().re;
    if !(p11 >= 1e-300) {
        return Err(Error::ZeroClickProbability { p11 });
    }
    let out = FockState::new(state.dim(), unnormalized.unscale(p11), state.trace_deficit() / p11)?;
    Ok((out, p11))
}

/// Kraus-sum form of the conditional map; returns the normalized state and
/// the double-click probability.
pub fn ips_apply(state: &FockState, tau: f64, eta: f64, max_pq: usize) -> Result<(FockState, f64)> {
    check_transmissivity(tau)?;
    check_efficiency(eta)?;
    if max_pq == 0 {
        return Err(Error::InvalidParameter {
            name: "max_pq",
            value: 0.0,
            reason: "at least one photon must be subtracted",
        });
    }
    let dim = state.dim();
    let cos = tau.sqrt();
    let ops: Vec<Lowering> = (1..=max_pq.min(dim - 1))
        .map(|k| Lowering {
            shift: k,
            weight: kraus_weight(k, tau, eta),
            amplitude: (0..dim)
                .map(|n| {
                    if n < k {
                        0.0
                    } else {
                        // sqrt(n! / (n-k)!) cos^n
                        ((n - k + 1)..=n).map(|i| (i as f64).sqrt()).product::<f64>() * cos.powi(n as i32)
                    }
                })
                .collect(),
        })
        .collect();
    let after_a = apply_on_mode(state.matrix(), dim, 0, &ops);
    let after_b = apply_on_mode(&after_a, dim, 1, &ops);
    finish(state, after_b)
}

/// Amplitudes `<n - k, k| U |n, 0>` of the signal/ancilla beam splitter,
/// indexed `[k][n]`, from the exponential of the generator in each block of
/// fixed total photon number.
fn beam_splitter_amplitudes(tau: f64, dim: usize) -> Vec<Vec<f64>> {
    let phi = tau.sqrt().acos();
    let mut amps = vec![vec![0.0; dim]; dim];
    for total in 0..dim {
        let size = total + 1;
        // Basis index s = photons left in the signal mode.
        let mut generator = DMatrix::<f64>::zeros(size, size);
        for s in 0..size {
            let ancilla = (total - s) as f64;
            if s + 1 < size {
                generator[(s + 1, s)] = -phi * ((s + 1) as f64).sqrt() * ancilla.sqrt();
            }
            if s > 0 {
                generator[(s - 1, s)] = phi * (s as f64).sqrt() * (ancilla + 1.0).sqrt();
            }
        }
        let unitary = generator.exp();
        for (k, row) in amps.iter_mut().enumerate().take(size) {
            row[total] = unitary[(total - k, total)];
        }
    }
    amps
}

/// Dilation form of the same map: beam splitters onto vacuum ancillas,
/// on/off detection of the ancillas, partial trace.
pub fn ips_apply_dilation(state: &FockState, tau: f64, eta: f64) -> Result<(FockState, f64)> {
    check_transmissivity(tau)?;
    check_efficiency(eta)?;
    let dim = state.dim();
    let amps = beam_splitter_amplitudes(tau, dim);
    let ops: Vec<Lowering> = amps
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(k, amplitude)| Lowering {
            shift: k,
            weight: 1.0 - (1.0 - eta).powi(k as i32),
            amplitude,
        })
        .collect();
    let after_a = apply_on_mode(state.matrix(), dim, 0, &ops);
    let after_b = apply_on_mode(&after_a, dim, 1, &ops);
    finish(state, after_b)
}
