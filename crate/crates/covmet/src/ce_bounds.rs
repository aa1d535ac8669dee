//! Channel-extension upper bounds on the QFI of `N` probes.
//!
//! Closed forms exist for unital maps and for amplitude damping; any other phase-covariant map
//! is split as `p·unital + (1−p)·amplitude damping` and bounded by convexity. The time-optimized
//! figure of merit is `MSE·T = t / F(t)`.

use crate::error::{Error, Result};
use crate::lindblad_bridge::MapTrajectory;
use crate::optim::{golden_section, minimize_log_grid};
use crate::qubit_channel::PhaseCovariantMap;

/// Points of the default scan of the admissible mixing range.
pub const P_SCAN_POINTS: usize = 33;
/// Relative tolerance of the golden refinement around the best scan point.
pub const P_REFINE_TOL: f64 = 1e-10;
/// Points of the global time grid.
pub const TIME_GRID_POINTS: usize = 200;
/// Relative tolerance of the golden-section time refinement.
pub const TIME_REL_TOL: f64 = 1e-8;
/// Default time bracket in units of the characteristic time.
pub const DEFAULT_BRACKET: (f64, f64) = (1e-8, 10.0);

const BETA_EQ_TOL: f64 = 1e-9;
const NOISELESS_TOL: f64 = 1e-15;

/// Leading short-time behaviour `1−η⊥ ≈ α⊥t^β⊥`, `1−η∥ ≈ α∥t^β∥`, `κ ≈ ακ t^βκ`.
///
/// A component that vanishes identically has `β = ∞` and `α = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortTimeExpansion {
    pub alpha_perp: f64,
    pub beta_perp: f64,
    pub alpha_par: f64,
    pub beta_par: f64,
    pub alpha_kappa: f64,
    pub beta_kappa: f64,
}

fn beta_eq(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= BETA_EQ_TOL * a.abs().max(b.abs())
}

impl ShortTimeExpansion {
    pub fn new(
        (alpha_perp, beta_perp): (f64, f64),
        (alpha_par, beta_par): (f64, f64),
        (alpha_kappa, beta_kappa): (f64, f64),
    ) -> Result<Self> {
        let e = Self {
            alpha_perp,
            beta_perp,
            alpha_par,
            beta_par,
            alpha_kappa,
            beta_kappa,
        };
        e.validate()?;
        Ok(e)
    }

    /// Only `η⊥` decays; `η∥ ≡ 1`, `κ ≡ 0`.
    pub fn pure_dephasing(alpha_perp: f64, beta_perp: f64) -> Result<Self> {
        Self::new((alpha_perp, beta_perp), (0.0, f64::INFINITY), (0.0, f64::INFINITY))
    }

    /// Checks the constraints implied by complete positivity at short times.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidExpansion(m));
        for (name, v) in [
            ("alpha_perp", self.alpha_perp),
            ("alpha_par", self.alpha_par),
            ("alpha_kappa", self.alpha_kappa),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if self.alpha_perp < 0.0 || self.alpha_par < 0.0 {
            return bad("alpha_perp and alpha_par must be non-negative".into());
        }
        if [self.beta_perp, self.beta_par, self.beta_kappa]
            .iter()
            .any(|b| b.is_nan() || *b < 1.0)
        {
            return bad("every exponent must be at least 1".into());
        }
        let tol = |x: f64| x * (1.0 + 1e-9) + 1e-15;
        if self.beta_perp > self.beta_par && !beta_eq(self.beta_perp, self.beta_par) {
            return bad(format!("beta_perp = {} exceeds beta_par = {}", self.beta_perp, self.beta_par));
        }
        if beta_eq(self.beta_perp, self.beta_par) && self.alpha_par > tol(2.0 * self.alpha_perp) {
            return bad(format!(
                "alpha_par = {} exceeds 2·alpha_perp = {}",
                self.alpha_par,
                2.0 * self.alpha_perp
            ));
        }
        if self.beta_par > self.beta_kappa && !beta_eq(self.beta_par, self.beta_kappa) {
            return bad(format!("beta_par = {} exceeds beta_kappa = {}", self.beta_par, self.beta_kappa));
        }
        if beta_eq(self.beta_par, self.beta_kappa) && self.alpha_kappa.abs() > tol(self.alpha_par) {
            return bad(format!(
                "|alpha_kappa| = {} exceeds alpha_par = {}",
                self.alpha_kappa.abs(),
                self.alpha_par
            ));
        }
        Ok(())
    }

    /// `(2β⊥ − 1)/β⊥`, the exponent of `N` in the asymptotic `MSE·T`.
    pub fn scaling_exponent(&self) -> f64 {
        (2.0 * self.beta_perp - 1.0) / self.beta_perp
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticConstant {
    pub alpha: f64,
    /// `MSE·T ≥ D / N^{(2β⊥−1)/β⊥}` asymptotically.
    pub d: f64,
    pub scaling_exponent: f64,
}

/// Constant of the asymptotic bound `MSE·T ≳ D N^{−(2β⊥−1)/β⊥}`.
///
/// For `β⊥ = 1` the value is the short-time (`t → 0`) limit only; whether a finite-time
/// minimum does better has to be decided by [`optimize_time`].
pub fn asymptotic_constant(exp: &ShortTimeExpansion) -> Result<AsymptoticConstant> {
    exp.validate()?;
    let b = exp.beta_perp;
    if !b.is_finite() {
        return Err(Error::InvalidExpansion("beta_perp must be finite".into()));
    }
    let alpha = if !beta_eq(b, exp.beta_par) {
        2.0 * exp.alpha_perp
    } else if !beta_eq(exp.beta_par, exp.beta_kappa) {
        2.0 * exp.alpha_perp - 0.5 * exp.alpha_par
    } else {
        let k = exp.alpha_kappa.abs();
        (2.0 * exp.alpha_perp - 0.5 * exp.alpha_par - 0.5 * k).max(0.25 * k)
    };
    let d = alpha.powf(1.0 / b) * b / (b - 1.0).powf((b - 1.0) / b);
    Ok(AsymptoticConstant {
        alpha,
        d,
        scaling_exponent: exp.scaling_exponent(),
    })
}

/// Interrogation time `t̄(N) = (α N (β⊥−1))^{−1/β⊥}` minimizing the asymptotic bound (`β⊥ > 1`).
pub fn tbar(exp: &ShortTimeExpansion, n: u64) -> Result<f64> {
    let a = asymptotic_constant(exp)?;
    let b = exp.beta_perp;
    if b <= 1.0 || a.alpha <= 0.0 {
        return Err(Error::InvalidExpansion(
            "t̄(N) needs beta_perp > 1 and a positive alpha".into(),
        ));
    }
    Ok((a.alpha * n as f64 * (b - 1.0)).powf(-1.0 / b))
}

fn check_nt(n: u64, t: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("t"));
    }
    Ok(())
}

/// `N²t²/(1 + Nℓ)` with `ℓ = (1 + η∥ − 2η⊥²)/(2η⊥²)`; valid for unital maps.
pub fn f_upper_unital(eta_perp: f64, eta_par: f64, n: u64, t: f64) -> Result<f64> {
    check_nt(n, t)?;
    if !(eta_perp.abs() > 0.0) {
        return Err(Error::InvalidParameter(
            "eta_perp = 0: the unital bound is undefined (the QFI vanishes)".into(),
        ));
    }
    let map = PhaseCovariantMap::new(eta_perp.abs(), eta_par, 0.0, 0.0)?;
    map.require_cptp()?;
    Ok(unital_value(eta_perp * eta_perp, eta_par, n as f64, t))
}

fn unital_value(eta_perp_sq: f64, eta_par: f64, n: f64, t: f64) -> f64 {
    if eta_perp_sq <= 0.0 {
        return 0.0;
    }
    let ell = ((1.0 + eta_par - 2.0 * eta_perp_sq) / (2.0 * eta_perp_sq)).max(0.0);
    n * n * t * t / (1.0 + n * ell)
}

/// `N²t²/(1 + Nr)` with `r = κ/(4(1−κ))` for amplitude damping.
///
/// Tight for `N ≥ 2`; at `N = 1` the same expression is still a valid (loose) bound.
pub fn f_upper_ad(kappa: f64, n: u64, t: f64) -> Result<f64> {
    check_nt(n, t)?;
    if !kappa.is_finite() {
        return Err(Error::NonFinite("kappa"));
    }
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::InvalidParameter(format!(
            "amplitude-damping bound needs 0 ≤ κ < 1, got {kappa}"
        )));
    }
    Ok(ad_value(kappa, n as f64, t))
}

fn ad_value(kappa: f64, n: f64, t: f64) -> f64 {
    if kappa >= 1.0 {
        return 0.0;
    }
    let r = (kappa / (4.0 * (1.0 - kappa))).max(0.0);
    n * n * t * t / (1.0 + n * r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingRange {
    pub lo: f64,
    pub hi: f64,
}

impl MixingRange {
    pub fn contains(&self, p: f64) -> bool {
        p >= self.lo - 1e-12 && p <= self.hi + 1e-12
    }

    /// `n` equally spaced points covering `[lo, hi]`.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        if n <= 1 || self.hi <= self.lo {
            return vec![self.hi];
        }
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Approximately optimal weight: the upper end of the range.
    pub fn p_opt(&self) -> f64 {
        self.hi
    }
}

/// `ℬ₊` and `ℬ₋` bounding the admissible mixing weight (κ ≥ 0).
pub fn b_pm(map: &PhaseCovariantMap) -> (f64, f64) {
    let (ep, ea, k) = (map.eta_perp, map.eta_par, map.kappa.abs());
    let b = |s: f64| {
        let num = 2.0 * (1.0 - k) * (2.0 + ea + s * 2.0 * ep)
            - (2.0 * ep + s * ea).powi(2)
            - (1.0 - k).powi(2);
        num / (4.0 * (1.0 + ea + s * 2.0 * ep))
    };
    (b(1.0), b(-1.0))
}

/// Admissible weights `p` of the unital component (after `κ → |κ|`).
pub fn mixing_range(map: &PhaseCovariantMap) -> Result<MixingRange> {
    map.require_cptp()?;
    let m = map.normalized();
    let (bp, bm) = b_pm(&m);
    let bar = 0.5 * (1.0 + m.eta_par - m.kappa);
    let hi = if m.eta_perp < bar { 1.0 - m.kappa } else { bm };
    let lo = bp.max(0.0);
    let hi = if hi.is_nan() { lo } else { hi.min(1.0) };
    if lo > hi + 1e-12 {
        return Err(Error::EmptyMixingRange { lo, hi });
    }
    Ok(MixingRange { lo, hi: hi.max(lo) })
}

/// `Λ = p·Λ_unital(η̃⊥, η̃∥) + (1−p)·Λ_AD(κ̃)` for a map with `κ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureDecomposition {
    pub p: f64,
    pub eta_perp: f64,
    pub eta_par: f64,
    pub kappa: f64,
}

impl MixtureDecomposition {
    pub fn unital_part(&self) -> PhaseCovariantMap {
        PhaseCovariantMap::unital(self.eta_perp, self.eta_par)
    }

    pub fn ad_part(&self) -> PhaseCovariantMap {
        PhaseCovariantMap::amplitude_damping(self.kappa)
    }

    /// Affine matrix of the recombined map (φ = 0).
    pub fn recombined(&self) -> nalgebra::Matrix4<f64> {
        self.unital_part().to_affine_matrix() * self.p + self.ad_part().to_affine_matrix() * (1.0 - self.p)
    }
}

fn mixture_parts(m: &PhaseCovariantMap, p: f64) -> MixtureDecomposition {
    let (ep, ea, k) = (m.eta_perp, m.eta_par, m.kappa);
    let q = 1.0 - p;
    let (eta_perp, eta_par) = if p > 0.0 {
        (
            (ep - (q * (q - k)).max(0.0).sqrt()) / p,
            (p - 1.0 + ea + k) / p,
        )
    } else {
        (1.0, 1.0)
    };
    let kappa = if q > 0.0 { k / q } else { 0.0 };
    MixtureDecomposition {
        p,
        eta_perp,
        eta_par,
        kappa,
    }
}

/// Splits `map` (κ replaced by |κ|, φ ignored) at weight `p`.
pub fn decompose_mixture(map: &PhaseCovariantMap, p: f64) -> Result<MixtureDecomposition> {
    let range = mixing_range(map)?;
    if !range.contains(p) {
        return Err(Error::MixingOutOfRange {
            p,
            lo: range.lo,
            hi: range.hi,
        });
    }
    Ok(mixture_parts(&map.normalized(), p.clamp(range.lo, range.hi)))
}

/// How the mixing weight is chosen in [`f_upper_general`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PPolicy {
    /// Scan of the admissible range (33 points, endpoints included), golden refinement around
    /// the best point, plus `p_opt`.
    #[default]
    Scan,
    /// `p_opt` only.
    Approximate,
    /// A single caller-chosen weight.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralBound {
    pub value: f64,
    pub p: f64,
}

/// Mixture bound `p·F_unital(η̃) + (1−p)·F_AD(κ̃)` minimized over the sampled weights.
pub fn f_upper_general(map: &PhaseCovariantMap, n: u64, t: f64, policy: PPolicy) -> Result<GeneralBound> {
    check_nt(n, t)?;
    map.require_cptp()?;
    let m = map.normalized();
    let nf = n as f64;
    // κ = 0, or the transverse CP edge 2η⊥ = 1+η∥ where CP forces κ ≈ 0 and ℬ₋ is 0/0
    if m.kappa == 0.0 || 1.0 + m.eta_par - 2.0 * m.eta_perp <= NOISELESS_TOL {
        return Ok(GeneralBound {
            value: unital_value(m.eta_perp * m.eta_perp, m.eta_par, nf, t),
            p: 1.0,
        });
    }
    let range = mixing_range(&m)?;
    let eval = |p: f64| mixture_value(&m, p, nf, t);
    let finite_min = |ps: Vec<f64>| {
        ps.into_iter()
            .map(|p| GeneralBound { value: eval(p), p })
            .filter(|b| b.value.is_finite())
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .ok_or(Error::EmptyMixingRange {
                lo: range.lo,
                hi: range.hi,
            })
    };
    match policy {
        PPolicy::Scan => {
            let grid = range.samples(P_SCAN_POINTS);
            let mut best = finite_min(grid.clone())?;
            let i = grid.iter().position(|&p| p == best.p).unwrap_or(0);
            let (a, b) = (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]);
            if b > a {
                let (p, v) = golden_section(&eval, a, b, P_REFINE_TOL);
                if v < best.value {
                    best = GeneralBound { value: v, p };
                }
            }
            let at_opt = finite_min(vec![range.p_opt()])?;
            Ok(if at_opt.value < best.value { at_opt } else { best })
        }
        PPolicy::Approximate => finite_min(vec![range.p_opt()]),
        PPolicy::Fixed(p) => {
            if !range.contains(p) {
                return Err(Error::MixingOutOfRange {
                    p,
                    lo: range.lo,
                    hi: range.hi,
                });
            }
            finite_min(vec![p.clamp(range.lo, range.hi)])
        }
    }
}

fn mixture_value(m: &PhaseCovariantMap, p: f64, n: f64, t: f64) -> f64 {
    let d = mixture_parts(m, p);
    let unital = if p > 0.0 {
        p * unital_value(d.eta_perp * d.eta_perp, d.eta_par, n, t)
    } else {
        0.0
    };
    let ad = if p < 1.0 {
        (1.0 - p) * ad_value(d.kappa, n, t)
    } else {
        0.0
    };
    unital + ad
}

/// Result of a time optimization of `MSE·T = t / F(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeOptimum {
    pub n: u64,
    pub t_opt: f64,
    pub mse_t: f64,
    /// Bound (or QFI) at `t_opt`.
    pub qfi: f64,
    /// False when the minimum sits on the edge of the bracket.
    pub converged: bool,
}

impl TimeOptimum {
    /// `MSE·T · N^{exponent}`.
    pub fn rescaled(&self, exponent: f64) -> f64 {
        self.mse_t * (self.n as f64).powf(exponent)
    }
}

/// Minimizes `t / qfi(t)` over `bracket` on a 200-point log grid with golden-section refinement.
pub fn optimize_time_with(
    n: u64,
    bracket: (f64, f64),
    qfi: impl Fn(f64) -> Result<f64>,
) -> Result<TimeOptimum> {
    let objective = |t: f64| match qfi(t) {
        Ok(f) if f > 0.0 => t / f,
        _ => f64::INFINITY,
    };
    let m = minimize_log_grid(objective, bracket.0, bracket.1, TIME_GRID_POINTS, TIME_REL_TOL)?;
    let q = qfi(m.x)?;
    Ok(TimeOptimum {
        n,
        t_opt: m.x,
        mse_t: m.value,
        qfi: q,
        converged: m.converged,
    })
}

/// Default bracket `[1e-8, 10]·τ_char`, clipped to the trajectory domain.
pub fn default_bracket(traj: &MapTrajectory) -> (f64, f64) {
    let tau = traj.tau_char();
    (DEFAULT_BRACKET.0 * tau, (DEFAULT_BRACKET.1 * tau).min(traj.t_max()))
}

/// Time-optimized mixture bound; `bracket = None` uses [`default_bracket`].
pub fn optimize_time(traj: &MapTrajectory, n: u64, bracket: Option<(f64, f64)>) -> Result<BoundOptimum> {
    let bracket = bracket.unwrap_or_else(|| default_bracket(traj));
    let opt = optimize_time_with(n, bracket, |t| {
        f_upper_general(&traj.at(t), n, t, PPolicy::Scan).map(|b| b.value)
    })?;
    let at = f_upper_general(&traj.at(opt.t_opt), n, opt.t_opt, PPolicy::Scan)?;
    let sql_constant = sql_constant(&traj.at(opt.t_opt), at.p);
    Ok(BoundOptimum {
        optimum: opt,
        p: at.p,
        sql_constant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptimum {
    pub optimum: TimeOptimum,
    /// Mixing weight used at `t_opt`.
    pub p: f64,
    /// `c = p/ℓ̃ + (1−p)/r̃` at `t_opt`: the large-`N` bound reads `F ≤ N t² c`.
    pub sql_constant: f64,
}

fn sql_constant(map: &PhaseCovariantMap, p: f64) -> f64 {
    let m = map.normalized();
    let d = mixture_parts(&m, p);
    let mut c = 0.0;
    if p > 0.0 {
        let e2 = d.eta_perp * d.eta_perp;
        let ell = (1.0 + d.eta_par - 2.0 * e2) / (2.0 * e2);
        c += p / ell;
    }
    if p < 1.0 && d.kappa > 0.0 {
        let r = d.kappa / (4.0 * (1.0 - d.kappa));
        c += (1.0 - p) / r;
    }
    c
}

/// One row of a bound or GHZ curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRecord {
    pub n: u64,
    pub t_opt: f64,
    pub mse_t: f64,
    pub rescaled_const: f64,
    pub converged: bool,
}

impl BoundRecord {
    pub fn from_optimum(opt: &TimeOptimum, exponent: f64) -> Self {
        Self {
            n: opt.n,
            t_opt: opt.t_opt,
            mse_t: opt.mse_t,
            rescaled_const: opt.rescaled(exponent),
            converged: opt.converged,
        }
    }
}

/// Time-optimized mixture bound for every `N` in `ns`.
pub fn bound_curve(
    traj: &MapTrajectory,
    exponent: f64,
    ns: &[u64],
    bracket: Option<(f64, f64)>,
) -> Result<Vec<BoundRecord>> {
    ns.iter()
        .map(|&n| optimize_time(traj, n, bracket).map(|o| BoundRecord::from_optimum(&o.optimum, exponent)))
        .collect()
}
