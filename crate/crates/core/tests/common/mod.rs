#![allow(dead_code)]

use gauss_quad::{GaussHermite, GaussLegendre};
use ipsbell::{PhasePoint, QuadratureJoint, TwoModeGaussianSum};
use num_complex::Complex64;

/// Gauss-Hermite rule for `int f(x) dx` with `f` decaying like `exp(-x^2 / scale^2)`
/// or faster: nodes and weights with the weight function divided out.
pub fn hermite_rule(n: usize, scale: f64) -> Vec<(f64, f64)> {
    GaussHermite::new(n)
        .unwrap()
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (scale * x, scale * w * (x * x).exp()))
        .collect()
}

/// Composite Gauss-Legendre rule on `[a, b]`.
pub fn legendre_rule(a: f64, b: f64, panels: usize, n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(n).unwrap();
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * n);
    for p in 0..panels {
        let lo = a + h * p as f64;
        for &(x, w) in rule.as_node_weight_pairs() {
            out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

/// Smallest curvature over all terms and both quadrature blocks, so one
/// Hermite scale `1/sqrt(lambda_min)` covers the widest term.
pub fn narrowest_curvature(state: &TwoModeGaussianSum) -> f64 {
    state
        .terms()
        .iter()
        .map(|t| {
            let (u, v, c) = (t.u.0, t.v.0, t.t.0);
            0.5 * (u + v) - (0.25 * (u - v).powi(2) + c * c).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Smallest curvature of any term along `(1, sign)/sqrt 2` in the `x` block
/// (the `p` block has the coupling sign flipped).
fn diagonal_curvature(state: &TwoModeGaussianSum, sign: f64) -> f64 {
    state
        .terms()
        .iter()
        .map(|t| 0.5 * (t.u.0 + t.v.0) - sign * t.t.0)
        .fold(f64::INFINITY, f64::min)
}

/// Brute-force four-dimensional integral of the Wigner function, in the
/// frame rotated by 45 degrees where squeezed states are nearly diagonal.
pub fn integrate_4d(state: &TwoModeGaussianSum, n: usize) -> f64 {
    let along = hermite_rule(n, 1.0 / diagonal_curvature(state, 1.0).sqrt());
    let across = hermite_rule(n, 1.0 / diagonal_curvature(state, -1.0).sqrt());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut total = 0.0;
    // x block: (s, d) with x1 = (s + d)/sqrt2, x2 = (s - d)/sqrt2; p block mirrored.
    for &(s, ws) in &along {
        for &(d, wd) in &across {
            for &(ps, wps) in &across {
                for &(pd, wpd) in &along {
                    let p = PhasePoint::new(
                        Complex64::new(h * (s + d), h * (ps + pd)),
                        Complex64::new(h * (s - d), h * (ps - pd)),
                    );
                    total += ws * wd * wps * wpd * state.evaluate(&p);
                }
            }
        }
    }
    total
}

/// `int int W(alpha, beta) dp_a dp_b` with `alpha = (xa + i pa) e^{i theta}`,
/// `beta = (xb + i pb) e^{i phi}`: the joint density of `(x_theta, x_phi)`.
pub fn marginal_density(state: &TwoModeGaussianSum, theta: f64, phi: f64, xa: f64, xb: f64, n: usize) -> f64 {
    let scale = 1.0 / narrowest_curvature(state).sqrt();
    let rule = hermite_rule(n, scale);
    let (ra, rb) = (Complex64::from_polar(1.0, theta), Complex64::from_polar(1.0, phi));
    let mut total = 0.0;
    for &(pa, wa) in &rule {
        for &(pb, wb) in &rule {
            let p = PhasePoint::new(Complex64::new(xa, pa) * ra, Complex64::new(xb, pb) * rb);
            total += wa * wb * state.evaluate(&p);
        }
    }
    total
}

/// `int int sign(x y) P(x, y)` quadrant by quadrant.
pub fn sign_integral(joint: &QuadratureJoint) -> f64 {
    let widest = joint
        .components()
        .iter()
        .map(|c| c.var_a.0.max(c.var_b.0))
        .fold(0.0, f64::max);
    let reach = 9.0 * widest.sqrt();
    let rule = legendre_rule(0.0, reach, 12, 40);
    let mut total = 0.0;
    for (sx, sy) in [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
        let sign = sx * sy;
        for &(x, wx) in &rule {
            for &(y, wy) in &rule {
                total += sign * wx * wy * joint.density(sx * x, sy * y);
            }
        }
    }
    total
}
