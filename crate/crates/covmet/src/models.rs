//! Concrete noise models: the Shabani–Lidar post-Markovian model, constant-rate semigroups and
//! Gaussian (Zeno-regime) dephasing, plus numerical extraction of short-time exponents.

use std::sync::Arc;

use crate::ce_bounds::ShortTimeExpansion;
use crate::error::{Error, Result};
use crate::lindblad_bridge::{MapDerivative, MapTrajectory, RateValues, TlmeRates};
use crate::optim::log_space;
use crate::qubit_channel::PhaseCovariantMap;

/// Parameters of the Shabani–Lidar model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlParams {
    /// Memory rate γ.
    pub gamma: f64,
    /// Dissipation constant γ₀.
    pub gamma0: f64,
    /// Mean bath excitation number n.
    pub n_bath: f64,
}

impl SlParams {
    pub fn new(gamma: f64, gamma0: f64, n_bath: f64) -> Result<Self> {
        let p = Self {
            gamma,
            gamma0,
            n_bath,
        };
        p.validate()?;
        Ok(p)
    }

    /// `γ = 0.2`, `γ₀ = 0.1`, `n = 10`.
    pub fn reference() -> Self {
        Self {
            gamma: 0.2,
            gamma0: 0.1,
            n_bath: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma0 > 0.0 && self.n_bath > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Shabani–Lidar parameters must be positive: {self:?}"
            )));
        }
        if !self.r().is_finite() {
            return Err(Error::NonFinite("R"));
        }
        Ok(())
    }

    /// `R = (γ₀/γ)(2n + 1)`.
    pub fn r(&self) -> f64 {
        self.gamma0 / self.gamma * (2.0 * self.n_bath + 1.0)
    }
}

/// `expm1(x)/x`, continuous at 0.
fn expm1_ratio(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

const DIRECT_EPS: f64 = 1e-3;

/// `f(R, τ) = (1 − R)/(1 − R e^{−(1−R)τ})`, total in `R` (`f(1, τ) = 1/(1 + τ)`).
pub fn sl_f(r: f64, tau: f64) -> f64 {
    let eps = 1.0 - r;
    // 1 − R e^{−ετ} = ε (τ E(−ετ) + e^{−ετ})
    1.0 / (tau * expm1_ratio(-eps * tau) + (-eps * tau).exp())
}

/// `e^{−Rτ}/f(R, τ) = (e^{−Rτ} − R e^{−τ})/(1 − R)`.
pub fn sl_eta(r: f64, tau: f64) -> f64 {
    let eps = 1.0 - r;
    if eps.abs() > DIRECT_EPS {
        ((-r * tau).exp() - r * (-tau).exp()) / eps
    } else {
        (-tau).exp() * (1.0 + tau * expm1_ratio(eps * tau))
    }
}

/// `d/dτ [e^{−Rτ}/f(R, τ)] = R (e^{−τ} − e^{−Rτ})/(1 − R)`.
pub fn sl_eta_dtau(r: f64, tau: f64) -> f64 {
    let eps = 1.0 - r;
    if eps.abs() > DIRECT_EPS {
        r * ((-tau).exp() - (-r * tau).exp()) / eps
    } else {
        -r * tau * (-tau).exp() * expm1_ratio(eps * tau)
    }
}

/// Map parameters of the Shabani–Lidar model, with analytic time derivatives.
pub fn sl_trajectory(p: SlParams) -> Result<MapTrajectory> {
    p.validate()?;
    let (g, r) = (p.gamma, p.r());
    let inv = 1.0 / (2.0 * p.n_bath + 1.0);
    let traj = MapTrajectory::new(
        move |t| {
            let eta_par = sl_eta(r, g * t);
            PhaseCovariantMap {
                eta_perp: sl_eta(0.5 * r, g * t),
                eta_par,
                kappa: -inv * (1.0 - eta_par),
                phi: 0.0,
            }
        },
        f64::INFINITY,
        1.0 / g,
    )
    .with_derivative(move |t| {
        let d_par = g * sl_eta_dtau(r, g * t);
        MapDerivative {
            eta_perp: g * sl_eta_dtau(0.5 * r, g * t),
            eta_par: d_par,
            kappa: inv * d_par,
            phi: 0.0,
        }
    });
    Ok(traj)
}

/// Closed-form Shabani–Lidar master-equation rates.
pub fn sl_rates(p: SlParams) -> Result<Arc<dyn TlmeRates>> {
    p.validate()?;
    let (g, r, n) = (p.gamma, p.r(), p.n_bath);
    Ok(Arc::new(move |t: f64| {
        let f = sl_f(r, g * t);
        let fh = sl_f(0.5 * r, g * t);
        RateValues {
            h: 0.0,
            gamma_plus: g * n / (2.0 * n + 1.0) * (1.0 - f),
            gamma_minus: g * (n + 1.0) / (2.0 * n + 1.0) * (1.0 - f),
            gamma_z: 0.25 * g * (1.0 - 2.0 * fh + f),
        }
    }))
}

/// `(α⊥, α∥, ακ) = (γγ₀(2n+1)/4, γγ₀(2n+1)/2, −γγ₀/2)`, all exponents 2.
pub fn sl_expansion(p: SlParams) -> Result<ShortTimeExpansion> {
    p.validate()?;
    let gg = p.gamma * p.gamma0;
    let m = 2.0 * p.n_bath + 1.0;
    ShortTimeExpansion::new((gg * m / 4.0, 2.0), (gg * m / 2.0, 2.0), (-gg / 2.0, 2.0))
}

fn check_rates(rates: &[(&'static str, f64)]) -> Result<()> {
    for &(name, v) in rates {
        if !v.is_finite() {
            return Err(Error::NonFinite(name));
        }
        if v < 0.0 {
            return Err(Error::InvalidParameter(format!("rate {name} = {v} must be non-negative")));
        }
    }
    Ok(())
}

/// Constant-rate dynamics: closed-form solution of the master equation.
pub fn semigroup_trajectory(g_plus: f64, g_minus: f64, g_z: f64) -> Result<MapTrajectory> {
    check_rates(&[("g_plus", g_plus), ("g_minus", g_minus), ("g_z", g_z)])?;
    let gpar = g_plus + g_minus;
    let gperp = 0.5 * (gpar + 4.0 * g_z);
    let drift = g_plus - g_minus;
    let scale = gpar + 4.0 * g_z;
    let tau_char = if scale > 0.0 { 1.0 / scale } else { 1.0 };
    // κ(t) = (γ₊ − γ₋) t · (1 − e^{−Γt})/(Γt)
    let kappa = move |t: f64| drift * t * expm1_ratio(-gpar * t);
    Ok(MapTrajectory::new(
        move |t| PhaseCovariantMap {
            eta_perp: (-gperp * t).exp(),
            eta_par: (-gpar * t).exp(),
            kappa: kappa(t),
            phi: 0.0,
        },
        f64::INFINITY,
        tau_char,
    )
    .with_derivative(move |t| MapDerivative {
        eta_perp: -gperp * (-gperp * t).exp(),
        eta_par: -gpar * (-gpar * t).exp(),
        kappa: drift * (-gpar * t).exp(),
        phi: 0.0,
    }))
}

pub fn semigroup_rates(g_plus: f64, g_minus: f64, g_z: f64) -> Arc<dyn TlmeRates> {
    Arc::new(move |_t: f64| RateValues {
        h: 0.0,
        gamma_plus: g_plus,
        gamma_minus: g_minus,
        gamma_z: g_z,
    })
}

fn power_term(alpha: f64, beta: f64) -> (f64, f64) {
    if alpha == 0.0 {
        (0.0, f64::INFINITY)
    } else {
        (alpha, beta)
    }
}

/// Leading-order expansion of a semigroup: every non-vanishing exponent equals 1.
pub fn semigroup_expansion(g_plus: f64, g_minus: f64, g_z: f64) -> Result<ShortTimeExpansion> {
    check_rates(&[("g_plus", g_plus), ("g_minus", g_minus), ("g_z", g_z)])?;
    ShortTimeExpansion::new(
        power_term(0.5 * (g_plus + g_minus + 4.0 * g_z), 1.0),
        power_term(g_plus + g_minus, 1.0),
        power_term(g_plus - g_minus, 1.0),
    )
}

/// Gaussian dephasing `η⊥ = e^{−(at)²}`, `η∥ = 1`, `κ = 0`.
pub fn zeno_dephasing_trajectory(a: f64) -> Result<MapTrajectory> {
    check_zeno(a)?;
    Ok(MapTrajectory::new(
        move |t| PhaseCovariantMap::dephasing((-(a * t).powi(2)).exp()),
        f64::INFINITY,
        1.0 / a,
    )
    .with_derivative(move |t| MapDerivative {
        eta_perp: -2.0 * a * a * t * (-(a * t).powi(2)).exp(),
        ..Default::default()
    }))
}

pub fn zeno_dephasing_expansion(a: f64) -> Result<ShortTimeExpansion> {
    check_zeno(a)?;
    ShortTimeExpansion::pure_dephasing(a * a, 2.0)
}

/// Unital Gaussian decay `η⊥ = η∥ = e^{−(at)²}`.
pub fn zeno_unital_trajectory(a: f64) -> Result<MapTrajectory> {
    check_zeno(a)?;
    Ok(MapTrajectory::new(
        move |t| {
            let e = (-(a * t).powi(2)).exp();
            PhaseCovariantMap::unital(e, e)
        },
        f64::INFINITY,
        1.0 / a,
    )
    .with_derivative(move |t| {
        let d = -2.0 * a * a * t * (-(a * t).powi(2)).exp();
        MapDerivative {
            eta_perp: d,
            eta_par: d,
            ..Default::default()
        }
    }))
}

pub fn zeno_unital_expansion(a: f64) -> Result<ShortTimeExpansion> {
    check_zeno(a)?;
    ShortTimeExpansion::new((a * a, 2.0), (a * a, 2.0), (0.0, f64::INFINITY))
}

fn check_zeno(a: f64) -> Result<()> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Zeno rate a = {a} must be positive")))
    }
}

/// Points used by [`extract_exponents`].
pub const FIT_POINTS: usize = 30;
/// Fit window in units of the characteristic time.
pub const FIT_WINDOW: (f64, f64) = (1e-6, 1e-3);
/// Minimal coefficient of determination of an accepted power law.
pub const MIN_R_SQUARED: f64 = 0.9999;

/// Result of a log–log regression of the short-time deficits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractedExpansion {
    /// Not validated against the CPTP constraints (fitted values carry noise).
    pub expansion: ShortTimeExpansion,
    /// R² of the `η⊥`, `η∥` and `κ` fits (1 for identically vanishing components).
    pub r_squared: [f64; 3],
    /// True when some component is not a clean power law.
    pub flagged: bool,
}

struct PowerFit {
    alpha: f64,
    beta: f64,
    r2: f64,
    ok: bool,
}

fn fit_power(ts: &[f64], ys: &[f64]) -> PowerFit {
    let nonzero = ys.iter().filter(|y| **y != 0.0).count();
    if nonzero == 0 {
        return PowerFit {
            alpha: 0.0,
            beta: f64::INFINITY,
            r2: 1.0,
            ok: true,
        };
    }
    if nonzero < ys.len() || ys.iter().any(|y| !y.is_finite()) {
        return PowerFit {
            alpha: f64::NAN,
            beta: f64::NAN,
            r2: 0.0,
            ok: false,
        };
    }
    let sign = ys.iter().map(|y| y.signum()).sum::<f64>().signum();
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ls: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ls.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ls).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ls.iter().map(|y| (y - my).powi(2)).sum();
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    let same_sign = ys.iter().all(|y| y.signum() == sign);
    PowerFit {
        alpha: sign * intercept.exp(),
        beta,
        r2,
        ok: same_sign && r2 >= MIN_R_SQUARED,
    }
}

/// Fits `1−η⊥`, `1−η∥` and `κ` to `α t^β` on 30 log-spaced times in `[1e-6, 1e-3]·τ_char`.
pub fn extract_exponents(traj: &MapTrajectory) -> ExtractedExpansion {
    let tau = traj.tau_char();
    let ts = log_space(FIT_WINDOW.0 * tau, FIT_WINDOW.1 * tau, FIT_POINTS);
    let maps: Vec<PhaseCovariantMap> = ts.iter().map(|&t| traj.at(t)).collect();
    let perp = fit_power(&ts, &maps.iter().map(|m| 1.0 - m.eta_perp).collect::<Vec<_>>());
    let par = fit_power(&ts, &maps.iter().map(|m| 1.0 - m.eta_par).collect::<Vec<_>>());
    let kap = fit_power(&ts, &maps.iter().map(|m| m.kappa).collect::<Vec<_>>());
    ExtractedExpansion {
        expansion: ShortTimeExpansion {
            alpha_perp: perp.alpha,
            beta_perp: perp.beta,
            alpha_par: par.alpha,
            beta_par: par.beta,
            alpha_kappa: kap.alpha,
            beta_kappa: kap.beta,
        },
        r_squared: [perp.r2, par.r2, kap.r2],
        flagged: !(perp.ok && par.ok && kap.ok),
    }
}

/// Noise models selectable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    ShabaniLidar(SlParams),
    Semigroup { g_plus: f64, g_minus: f64, g_z: f64 },
    ZenoDephasing { a: f64 },
    ZenoUnital { a: f64 },
    Noiseless,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::ShabaniLidar(_) => "sl",
            Model::Semigroup { .. } => "semigroup",
            Model::ZenoDephasing { .. } => "zeno",
            Model::ZenoUnital { .. } => "zeno-unital",
            Model::Noiseless => "noiseless",
        }
    }

    pub fn trajectory(&self) -> Result<MapTrajectory> {
        match *self {
            Model::ShabaniLidar(p) => sl_trajectory(p),
            Model::Semigroup { g_plus, g_minus, g_z } => semigroup_trajectory(g_plus, g_minus, g_z),
            Model::ZenoDephasing { a } => zeno_dephasing_trajectory(a),
            Model::ZenoUnital { a } => zeno_unital_trajectory(a),
            Model::Noiseless => Ok(MapTrajectory::identity()),
        }
    }

    /// Declared short-time expansion; the noiseless model has none.
    pub fn expansion(&self) -> Result<ShortTimeExpansion> {
        match *self {
            Model::ShabaniLidar(p) => sl_expansion(p),
            Model::Semigroup { g_plus, g_minus, g_z } => semigroup_expansion(g_plus, g_minus, g_z),
            Model::ZenoDephasing { a } => zeno_dephasing_expansion(a),
            Model::ZenoUnital { a } => zeno_unital_expansion(a),
            Model::Noiseless => Err(Error::InvalidExpansion("the noiseless model has no decay".into())),
        }
    }

    /// Closed-form master-equation rates where the model provides them.
    pub fn rates(&self) -> Option<Arc<dyn TlmeRates>> {
        match *self {
            Model::ShabaniLidar(p) => sl_rates(p).ok(),
            Model::Semigroup { g_plus, g_minus, g_z } => Some(semigroup_rates(g_plus, g_minus, g_z)),
            Model::Noiseless => Some(semigroup_rates(0.0, 0.0, 0.0)),
            _ => None,
        }
    }

    /// Exponent of `N` in the rescaled constant (2 without decay).
    pub fn scaling_exponent(&self) -> f64 {
        match self.expansion() {
            Ok(e) if e.beta_perp.is_finite() => e.scaling_exponent(),
            _ => 2.0,
        }
    }
}
