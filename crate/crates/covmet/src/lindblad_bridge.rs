//! Conversion between map trajectories `t ↦ Λ(t)` and the rates of the time-local master
//! equation
//!
//! `dρ/dt = −i h/2 [σz, ρ] + γ₊ D[σ₊]ρ + γ₋ D[σ₋]ρ + γ_z D[σz]ρ`,
//!
//! plus the CP-divisibility test (all rates non-negative).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::qubit_channel::PhaseCovariantMap;

/// Relative tolerance of every quadrature in this module.
pub const QUAD_TOL: f64 = 1e-10;
/// Finite-difference step in units of the characteristic time.
pub const FD_STEP: f64 = 1e-6;
/// Rates below this are still counted as non-negative.
pub const CP_TOL: f64 = 1e-12;
/// `|η|` below this makes the map non-invertible.
const SINGULAR_ETA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateValues {
    pub h: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_z: f64,
}

impl RateValues {
    pub fn is_finite(&self) -> bool {
        self.h.is_finite()
            && self.gamma_plus.is_finite()
            && self.gamma_minus.is_finite()
            && self.gamma_z.is_finite()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.h - other.h,
            self.gamma_plus - other.gamma_plus,
            self.gamma_minus - other.gamma_minus,
            self.gamma_z - other.gamma_z,
        ]
        .iter()
        .fold(0.0, |m, d| m.max(d.abs()))
    }

    fn scale(&self) -> f64 {
        self.h.abs() + self.gamma_plus.abs() + self.gamma_minus.abs() + 4.0 * self.gamma_z.abs()
    }
}

/// Time-dependent master-equation rates.
pub trait TlmeRates: Send + Sync {
    fn at(&self, t: f64) -> RateValues;
}

impl<F> TlmeRates for F
where
    F: Fn(f64) -> RateValues + Send + Sync,
{
    fn at(&self, t: f64) -> RateValues {
        self(t)
    }
}

/// Time derivatives of the map parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MapDerivative {
    pub eta_perp: f64,
    pub eta_par: f64,
    pub kappa: f64,
    pub phi: f64,
}

type MapFn = dyn Fn(f64) -> PhaseCovariantMap + Send + Sync;
type DerivFn = dyn Fn(f64) -> MapDerivative + Send + Sync;

/// Map-valued function of time with `Λ(0) = 𝟙`, defined on `[0, t_max]`.
#[derive(Clone)]
pub struct MapTrajectory {
    eval: Arc<MapFn>,
    deriv: Option<Arc<DerivFn>>,
    t_max: f64,
    tau_char: f64,
}

impl fmt::Debug for MapTrajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapTrajectory")
            .field("t_max", &self.t_max)
            .field("tau_char", &self.tau_char)
            .field("analytic_derivatives", &self.deriv.is_some())
            .finish()
    }
}

impl MapTrajectory {
    pub fn new(
        eval: impl Fn(f64) -> PhaseCovariantMap + Send + Sync + 'static,
        t_max: f64,
        tau_char: f64,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            deriv: None,
            t_max,
            tau_char,
        }
    }

    pub fn with_derivative(
        mut self,
        deriv: impl Fn(f64) -> MapDerivative + Send + Sync + 'static,
    ) -> Self {
        self.deriv = Some(Arc::new(deriv));
        self
    }

    pub fn identity() -> Self {
        Self::new(|_| PhaseCovariantMap::IDENTITY, f64::INFINITY, 1.0)
            .with_derivative(|_| MapDerivative::default())
    }

    pub fn at(&self, t: f64) -> PhaseCovariantMap {
        (self.eval)(t)
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn tau_char(&self) -> f64 {
        self.tau_char
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.deriv.is_some()
    }

    /// Analytic derivative when available, otherwise a second-order finite difference
    /// (one-sided close to `t = 0`).
    pub fn derivative(&self, t: f64) -> MapDerivative {
        if let Some(d) = &self.deriv {
            return d(t);
        }
        let h = FD_STEP * self.tau_char;
        let diff = |a: PhaseCovariantMap, b: PhaseCovariantMap, c: PhaseCovariantMap, w: [f64; 3]| {
            let comb = |f: fn(&PhaseCovariantMap) -> f64| (w[0] * f(&a) + w[1] * f(&b) + w[2] * f(&c)) / h;
            MapDerivative {
                eta_perp: comb(|m| m.eta_perp),
                eta_par: comb(|m| m.eta_par),
                kappa: comb(|m| m.kappa),
                phi: comb(|m| m.phi),
            }
        };
        if t >= h {
            diff(self.at(t - h), self.at(t), self.at(t + h), [-0.5, 0.0, 0.5])
        } else {
            diff(self.at(t), self.at(t + h), self.at(t + 2.0 * h), [-1.5, 2.0, -0.5])
        }
    }

    /// Largest deviation of `Λ(0)` from the identity.
    pub fn initial_condition_error(&self) -> f64 {
        let m = self.at(0.0);
        [m.eta_perp - 1.0, m.eta_par - 1.0, m.kappa, m.phi]
            .iter()
            .fold(0.0, |a, d| a.max(d.abs()))
    }
}

/// Rates of the master equation generating `traj` at time `t`.
pub fn rates_from_trajectory(traj: &MapTrajectory, t: f64) -> Result<RateValues> {
    let m = traj.at(t);
    if m.eta_perp.abs() < SINGULAR_ETA || m.eta_par.abs() < SINGULAR_ETA {
        return Err(Error::SingularMap { t });
    }
    let d = traj.derivative(t);
    let lpar = d.eta_par / m.eta_par;
    let lperp = d.eta_perp / m.eta_perp;
    Ok(RateValues {
        h: d.phi,
        gamma_plus: 0.5 * (d.kappa - lpar * (m.kappa + 1.0)),
        gamma_minus: -0.5 * (d.kappa + lpar * (1.0 - m.kappa)),
        gamma_z: 0.25 * (lpar - 2.0 * lperp),
    })
}

/// Trajectory obtained by integrating rates, together with its values on the grid.
#[derive(Debug, Clone)]
pub struct IntegratedTrajectory {
    pub trajectory: MapTrajectory,
    pub samples: Vec<(f64, PhaseCovariantMap)>,
    /// First grid time at which the rates (or their integrals) stopped being finite.
    pub singularity: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    t: f64,
    theta: f64,
    /// `∫₀ᵗ (γ₊ + γ₋)`.
    g_par: f64,
    /// `∫₀ᵗ (γ₊ + γ₋ + 4γ_z)`.
    g_perp: f64,
    kappa: f64,
}

impl Node {
    fn map(&self) -> PhaseCovariantMap {
        PhaseCovariantMap {
            eta_perp: (-0.5 * self.g_perp).exp(),
            eta_par: (-self.g_par).exp(),
            kappa: self.kappa,
            phi: self.theta,
        }
    }
}

fn step(rates: &dyn TlmeRates, from: &Node, t: f64) -> Result<Node> {
    let a = from.t;
    let q = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| adaptive_simpson(&|s| f(s), lo, hi, QUAD_TOL);
    let gamma = |s: f64| {
        let r = rates.at(s);
        r.gamma_plus + r.gamma_minus
    };
    let theta = q(&|s| rates.at(s).h, a, t)?;
    let g_par = q(&gamma, a, t)?;
    let g_perp = q(
        &|s| {
            let r = rates.at(s);
            r.gamma_plus + r.gamma_minus + 4.0 * r.gamma_z
        },
        a,
        t,
    )?;
    // κ(t) = κ(a) e^{−∫ₐᵗΓ} + ∫ₐᵗ (γ₊ − γ₋)(s) e^{−∫ₛᵗΓ} ds
    let source = |s: f64| {
        let r = rates.at(s);
        let d = r.gamma_plus - r.gamma_minus;
        if d == 0.0 {
            return 0.0;
        }
        match adaptive_simpson(&gamma, s, t, QUAD_TOL) {
            Ok(decay) => d * (-decay).exp(),
            Err(_) => f64::NAN,
        }
    };
    let kick = q(&source, a, t)?;
    Ok(Node {
        t,
        theta: from.theta + theta,
        g_par: from.g_par + g_par,
        g_perp: from.g_perp + g_perp,
        kappa: from.kappa * (-g_par).exp() + kick,
    })
}

/// Integrates `rates` on an ascending `grid` (a leading `0` is implied).
///
/// Integration stops at the first grid point where the rates are not finite; the
/// returned trajectory is then defined up to the previous grid point.
pub fn trajectory_from_rates(
    rates: Arc<dyn TlmeRates>,
    grid: &[f64],
) -> Result<IntegratedTrajectory> {
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "time grid must be finite, non-negative and strictly ascending".into(),
        ));
    }
    let origin = Node {
        t: 0.0,
        theta: 0.0,
        g_par: 0.0,
        g_perp: 0.0,
        kappa: 0.0,
    };
    let mut nodes = vec![origin];
    let mut singularity = None;
    let mut scale: f64 = 0.0;
    for &t in grid.iter().filter(|&&t| t > 0.0) {
        let r = rates.at(t);
        if !r.is_finite() {
            singularity = Some(t);
            break;
        }
        scale = scale.max(r.scale());
        match step(rates.as_ref(), nodes.last().expect("origin present"), t) {
            Ok(n) if n.kappa.is_finite() => nodes.push(n),
            _ => {
                singularity = Some(t);
                break;
            }
        }
    }
    let r0 = rates.at(0.0);
    if r0.is_finite() {
        scale = scale.max(r0.scale());
    }
    let t_max = nodes.last().expect("origin present").t;
    let tau_char = if scale > 0.0 { 1.0 / scale } else { t_max.max(1.0) };
    let samples: Vec<(f64, PhaseCovariantMap)> = if grid.first() == Some(&0.0) {
        nodes.iter().map(|n| (n.t, n.map())).collect()
    } else {
        nodes[1..].iter().map(|n| (n.t, n.map())).collect()
    };

    let nodes = Arc::new(nodes);
    let eval_nodes = Arc::clone(&nodes);
    let eval_rates = Arc::clone(&rates);
    let locate = move |t: f64| -> PhaseCovariantMap {
        let k = eval_nodes.partition_point(|n| n.t <= t).saturating_sub(1);
        let base = &eval_nodes[k];
        if t == base.t {
            return base.map();
        }
        step(eval_rates.as_ref(), base, t)
            .map(|n| n.map())
            .unwrap_or(PhaseCovariantMap {
                eta_perp: f64::NAN,
                eta_par: f64::NAN,
                kappa: f64::NAN,
                phi: f64::NAN,
            })
    };
    let locate = Arc::new(locate);
    let eval = Arc::clone(&locate);
    let deriv_rates = Arc::clone(&rates);
    let trajectory = MapTrajectory::new(move |t| eval(t), t_max, tau_char).with_derivative(move |t| {
        let m = locate(t);
        let r = deriv_rates.at(t);
        let gamma = r.gamma_plus + r.gamma_minus;
        MapDerivative {
            eta_perp: -0.5 * (gamma + 4.0 * r.gamma_z) * m.eta_perp,
            eta_par: -gamma * m.eta_par,
            kappa: (r.gamma_plus - r.gamma_minus) - gamma * m.kappa,
            phi: r.h,
        }
    });
    Ok(IntegratedTrajectory {
        trajectory,
        samples,
        singularity,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpDivisibility {
    pub divisible: bool,
    pub first_violation: Option<f64>,
}

/// CP-divisible iff `γ₊, γ₋, γ_z ≥ −1e-12` at every grid point.
pub fn is_cp_divisible(rates: &dyn TlmeRates, grid: &[f64]) -> CpDivisibility {
    let first_violation = grid.iter().copied().find(|&t| {
        let r = rates.at(t);
        !(r.gamma_plus >= -CP_TOL && r.gamma_minus >= -CP_TOL && r.gamma_z >= -CP_TOL)
    });
    CpDivisibility {
        divisible: first_violation.is_none(),
        first_violation,
    }
}
