//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};

/// Maximum bisection depth; bounds the number of subintervals by 2^20.
const MAX_DEPTH: u32 = 20;

/// `∫ₐᵇ f` to relative tolerance `rel_tol` (relative to the magnitude of the integral).
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    if !whole.is_finite() {
        return Err(Error::InvalidParameter(format!("integrand not finite on [{a}, {b}]")));
    }
    // A cheap 9-point estimate fixes the absolute target before refinement.
    let scale = {
        let n = 8;
        let h = (b - a) / n as f64;
        let mut s = fa + fb;
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        (s * h / 3.0).abs().max(whole.abs())
    };
    let eps = rel_tol * scale.max(f64::MIN_POSITIVE);
    let v = recurse(f, a, b, fa, fm, fb, whole, eps, MAX_DEPTH);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("integrand not finite on [{a}, {b}]")))
    }
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps || !delta.is_finite() {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let v = adaptive_simpson(&|x: f64| x.exp(), 0.0, 2.0, 1e-12).unwrap();
        assert!((v - (2f64.exp() - 1.0)).abs() < 1e-11);
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
        assert_eq!(adaptive_simpson(&|_| 0.0, 0.0, 1.0, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(adaptive_simpson(&|x: f64| 1.0 / (x - 0.5), 0.0, 1.0, 1e-10).is_err());
    }
}
