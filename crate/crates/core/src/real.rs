//! Double-double scalar used by the closed-form models.
//!
//! The photon-subtracted Wigner function is a sum of four Gaussians whose
//! weights cancel to a relative size of order the click probability, so the
//! closed forms are carried in ~106-bit arithmetic and only rounded to `f64`
//! at the API boundary. `qd::Quad` supplies the field operations, `sqrt` and
//! `exp`; the few transcendental functions it lacks live here.

pub use qd::Quad as Real;

pub const PI: Real = Real::PI;
pub const FRAC_PI_2: Real = Real(1.5707963267948966, 6.123233995736766e-17);

/// Relative precision of a `Real`.
pub const EPSILON: f64 = 4.93038065763132e-32;

#[inline]
pub fn real(x: f64) -> Real {
    Real::from_f64(x)
}

#[inline]
pub fn to_f64(x: Real) -> f64 {
    x.0 + x.1
}

/// Sum without the cancellation loss of the default (sloppy) addition.
pub fn sum_accurate<I: IntoIterator<Item = Real>>(items: I) -> Real {
    items
        .into_iter()
        .fold(Real::ZERO, |acc, x| acc.add_accurate(x))
}

pub fn sinh(x: Real) -> Real {
    if x.0.abs() < 0.5 {
        // Taylor series; |x| < 0.5 needs at most 14 terms for full precision.
        let x2 = x * x;
        let mut term = x;
        let mut acc = x;
        let mut k = 1.0;
        loop {
            term = term * x2 / real((k + 1.0) * (k + 2.0));
            acc = acc + term;
            k += 2.0;
            if term.0.abs() <= EPSILON * acc.0.abs() {
                break;
            }
        }
        acc
    } else {
        let e = x.exp();
        (e - e.recip()) * real(0.5)
    }
}

pub fn cosh(x: Real) -> Real {
    let e = x.exp();
    (e + e.recip()) * real(0.5)
}

/// Sine and cosine by Taylor series; intended for |x| <= pi/2.
pub fn sin_cos(x: Real) -> (Real, Real) {
    let x2 = x * x;
    let mut s_term = x;
    let mut s = x;
    let mut c_term = Real::ONE;
    let mut c = Real::ONE;
    let mut k = 1.0;
    for _ in 0..40 {
        s_term = -(s_term * x2) / real((k + 1.0) * (k + 2.0));
        c_term = -(c_term * x2) / real(k * (k + 1.0));
        s = s + s_term;
        c = c + c_term;
        k += 2.0;
        if s_term.0.abs() <= EPSILON * 1e-2 && c_term.0.abs() <= EPSILON * 1e-2 {
            break;
        }
    }
    (s, c)
}

/// Arcsine on [-1, 1] via Newton refinement of the `f64` estimate.
pub fn asin(x: Real) -> Real {
    let xf = to_f64(x);
    debug_assert!(xf.abs() <= 1.0 + 1e-15, "asin argument {xf} out of range");
    if xf >= 1.0 {
        return FRAC_PI_2;
    }
    if xf <= -1.0 {
        return -FRAC_PI_2;
    }
    let mut y = real(xf.asin());
    for _ in 0..2 {
        let (s, c) = sin_cos(y);
        if c.0 == 0.0 {
            break;
        }
        y = y - (s - x) / c;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values: 50-digit evaluations split into (hi, lo) pairs.
    fn rel_err(got: Real, hi: f64, lo: f64) -> f64 {
        let want = Real(hi, lo);
        to_f64((got - want) / want).abs()
    }

    #[test]
    fn exp_matches_reference() {
        assert!(rel_err(real(0.1).exp(), 1.1051709180756477, -8.149523913327619e-17) < 1e-30);
        assert!(rel_err(real(-3.7).exp(), 0.024723526470339388, -1.294857794723138e-18) < 1e-30);
        assert!(rel_err(real(20.5).exp(), 799902177.4755054, 5.468433516540899e-08) < 1e-30);
    }

    #[test]
    fn hyperbolic_functions() {
        assert!(rel_err(sinh(real(1e-3)), 0.001000000166666675, -3.571742859983052e-20) < 1e-30);
        assert!(rel_err(sinh(real(0.6)), 0.6366535821482412, 5.203896601858732e-17) < 1e-30);
        assert!(rel_err(cosh(real(0.6)), 1.1854652182422676, 1.0748819439096445e-16) < 1e-30);
        assert!(rel_err(sinh(real(3.0)), 10.017874927409903, -6.97789774734877e-16) < 1e-30);
    }

    #[test]
    fn arcsine() {
        assert!(rel_err(asin(real(0.3)), 0.3046926540153975, -2.7469740051157017e-17) < 1e-30);
        assert!(rel_err(asin(real(-0.95)), -1.253235897503375, -6.507200223075429e-17) < 1e-29);
        assert_eq!(to_f64(asin(Real::ONE)), std::f64::consts::FRAC_PI_2);
        assert_eq!(to_f64(asin(Real::ZERO)), 0.0);
    }

    #[test]
    fn accurate_sum_keeps_low_bits() {
        let big = real(1e20);
        let s = sum_accurate([big, real(1.0), -big, real(1e-10)]);
        assert!((to_f64(s) - (1.0 + 1e-10)).abs() < 1e-25);
    }
}
