//! QFI of the N-qubit GHZ state under independent phase-covariant noise, its time
//! optimization and the large-N constant.

use crate::ce_bounds::{
    default_bracket, optimize_time_with, BoundRecord, ShortTimeExpansion, TimeOptimum,
};
use crate::error::{finite, Error, Result};
use crate::lindblad_bridge::MapTrajectory;
use crate::optim::bisect;
use crate::qubit_channel::PhaseCovariantMap;

/// `F = t²N²η⊥^{2N} / (2^{−(N+1)} Σ A±±^N)` with `A±± = 1 ± η∥ ± κ`, evaluated in log space.
///
/// Only finiteness is checked: the expression is evaluated for any map, with signed powers
/// for negative `A±±` (which only occur outside the CPTP set).
pub fn ghz_qfi(map: &PhaseCovariantMap, n: u64, t: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    finite("t", t)?;
    map.validate_cptp()?;
    let nf = n as f64;
    let (ea, k) = (map.eta_par, map.kappa);
    let a = [1.0 - ea - k, 1.0 + ea - k, 1.0 - ea + k, 1.0 + ea + k];
    let big = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if big == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let odd = n % 2 == 1;
    // Σ A^N = big^N · Σ sign(A)^N (|A|/big)^N
    let sum: f64 = a
        .iter()
        .filter(|x| **x != 0.0)
        .map(|&x| {
            let mag = (nf * (x.abs() / big).ln()).exp();
            if odd && x < 0.0 {
                -mag
            } else {
                mag
            }
        })
        .sum();
    if !(sum > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    if t == 0.0 || map.eta_perp == 0.0 {
        return Ok(0.0);
    }
    let ln_num = 2.0 * (t.abs() * nf).ln() + 2.0 * nf * (map.eta_perp - 1.0).ln_1p();
    let ln_den = nf * (0.5 * big).ln() + sum.ln() - std::f64::consts::LN_2;
    Ok((ln_num - ln_den).exp())
}

/// Time-optimized GHZ strategy; `bracket = None` uses the default bracket of the trajectory.
pub fn ghz_optimize_time(
    traj: &MapTrajectory,
    n: u64,
    bracket: Option<(f64, f64)>,
) -> Result<TimeOptimum> {
    let bracket = bracket.unwrap_or_else(|| default_bracket(traj));
    optimize_time_with(n, bracket, |t| ghz_qfi(&traj.at(t), n, t))
}

pub fn ghz_curve(
    traj: &MapTrajectory,
    exponent: f64,
    ns: &[u64],
    bracket: Option<(f64, f64)>,
) -> Result<Vec<BoundRecord>> {
    ns.iter()
        .map(|&n| ghz_optimize_time(traj, n, bracket).map(|o| BoundRecord::from_optimum(&o, exponent)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzAsymptotic {
    /// `t_GHZ(N) ≈ (α_t N)^{−1/β⊥}`.
    pub alpha_t: f64,
    /// Limit of `MSE·T · N^{(2β⊥−1)/β⊥}`.
    pub constant: f64,
    /// Residual of the stationarity condition at `alpha_t`.
    pub residual: f64,
    /// Bracket guaranteed to contain `alpha_t`.
    pub bracket: (f64, f64),
}

/// Optimal `α_t` and the GHZ constant `α_t^{1/β} e^{(2α⊥ − α∥/2)/α_t} cosh(ακ/(2α_t))`.
pub fn ghz_asymptotic_constant(exp: &ShortTimeExpansion) -> Result<GhzAsymptotic> {
    exp.validate()?;
    let b = exp.beta_perp;
    if !b.is_finite() {
        return Err(Error::InvalidExpansion("beta_perp must be finite".into()));
    }
    let par = if exp.beta_par > b { 0.0 } else { exp.alpha_par };
    let kap = if exp.beta_kappa > b { 0.0 } else { exp.alpha_kappa };
    let c = 2.0 * exp.alpha_perp - 0.5 * par;
    if !(c > 0.0) {
        return Err(Error::InvalidExpansion(format!(
            "empty α_t bracket: 2α⊥ − α∥/2 = {c} is not positive"
        )));
    }
    let stationarity = |a: f64| {
        let drive = if kap == 0.0 { 0.0 } else { 0.5 * kap * (0.5 * kap / a).tanh() };
        a / b - drive - c
    };
    let bracket = (b * c, b * (c + 0.5 * kap.abs()));
    let alpha_t = bisect(stationarity, bracket.0, bracket.1, 0.0)?;
    let constant =
        alpha_t.powf(1.0 / b) * (c / alpha_t).exp() * (0.5 * kap / alpha_t).cosh();
    Ok(GhzAsymptotic {
        alpha_t,
        constant,
        residual: stationarity(alpha_t).abs(),
        bracket,
    })
}
