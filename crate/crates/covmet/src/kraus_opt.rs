//! Numerical channel-extension bound.
//!
//! Equivalent Kraus representations `K̃ = e^{−i𝔥ωt}K` shift the ω-derivatives to
//! `K̇′ᵢ = K̇ᵢ − i t Σⱼ 𝔥ᵢⱼ Kⱼ`; the bound is the minimum over Hermitian 4×4 generators 𝔥 of
//! `4N(‖A‖ + (N−1)‖B‖²)` with `A = Σ K̇′†K̇′` and `B = Σ K̇′†K`.

use std::cell::RefCell;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::ce_bounds::{f_upper_general, optimize_time, BoundRecord, PPolicy, TimeOptimum};
use crate::error::{finite, Error, Result};
use crate::lindblad_bridge::MapTrajectory;
use crate::linalg::{c, herm2_norm, herm4_from_params, herm4_to_params, op_norm2, Mat2, Mat4, C64, I};
use crate::optim::{minimize_log_grid, nelder_mead, NelderMeadOptions};
use crate::qubit_channel::{KrausSet, PhaseCovariantMap};

/// Restarts per minimization.
pub const RESTARTS: usize = 8;
/// Relative scale of the Gaussian perturbations used by the random restarts.
pub const PERTURBATION_SCALE: f64 = 0.1;
/// Grid points of the bracketed time search for the numeric bound.
pub const NUMERIC_TIME_POINTS: usize = 13;
/// Relative tolerance of the golden refinement of the numeric time search.
pub const NUMERIC_TIME_TOL: f64 = 1e-4;

const HERMITIAN_TOL: f64 = 1e-12;
const COMPLETENESS_TOL: f64 = 1e-10;
const RANK_FLOOR: f64 = 1e-14;

/// `Σ` over a Kraus family with generator entries `gen(i, j)`.
fn ce_value(ops: &[Mat2], derivs: &[Mat2], gen: impl Fn(usize, usize) -> C64, n: f64, t: f64) -> f64 {
    let mut a = Mat2::zeros();
    let mut b = Mat2::zeros();
    for (i, (k, dk)) in ops.iter().zip(derivs).enumerate() {
        let mut d = *dk;
        for (j, kj) in ops.iter().enumerate() {
            let h = gen(i, j);
            if h != C64::new(0.0, 0.0) {
                d -= kj * (I * t * h);
            }
        }
        let dd = d.adjoint();
        a += dd * d;
        b += dd * k;
    }
    let nb = op_norm2(&b);
    4.0 * n * (herm2_norm(&a) + (n - 1.0) * nb * nb)
}

/// Objective for an arbitrary Kraus family (any number of operators) and generator.
pub fn family_objective(ops: &[Mat2], derivs: &[Mat2], gen: &DMatrix<C64>, n: u64, t: f64) -> Result<f64> {
    let k = ops.len();
    if derivs.len() != k || gen.nrows() != k || gen.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "{k} Kraus operators, {} derivatives, {}×{} generator",
            derivs.len(),
            gen.nrows(),
            gen.ncols()
        )));
    }
    Ok(ce_value(ops, derivs, |i, j| gen[(i, j)], n as f64, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausObjective {
    pub kraus: KrausSet,
    pub n: u64,
    pub t: f64,
    map: Option<PhaseCovariantMap>,
}

impl KrausObjective {
    pub fn new(kraus: KrausSet, n: u64, t: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        finite("t", t)?;
        let err = kraus.completeness_error();
        if !(err <= COMPLETENESS_TOL) {
            return Err(Error::NotCptp(format!("Kraus set completeness error {err:e}")));
        }
        Ok(Self { kraus, n, t, map: None })
    }

    /// Canonical Kraus operators of `map`; the map is kept to seed [`minimize`].
    pub fn from_map(map: &PhaseCovariantMap, n: u64, t: f64) -> Result<Self> {
        let mut obj = Self::new(map.canonical_kraus(t)?, n, t)?;
        obj.map = Some(*map);
        Ok(obj)
    }

    pub fn map(&self) -> Option<&PhaseCovariantMap> {
        self.map.as_ref()
    }

    /// Objective at a generator given by its 16 real parameters (no Hermiticity check needed).
    pub fn value_params(&self, x: &[f64]) -> f64 {
        self.value(&herm4_from_params(x))
    }

    fn value(&self, gen: &Mat4) -> f64 {
        ce_value(&self.kraus.ops, &self.kraus.derivs, |i, j| gen[(i, j)], self.n as f64, self.t)
    }
}

/// `4N(‖A‖ + (N−1)‖B‖²)` at generator `gen`, which must be Hermitian to 1e-12.
pub fn objective(gen: &Mat4, obj: &KrausObjective) -> Result<f64> {
    let herm = (gen - gen.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if !(herm <= HERMITIAN_TOL) {
        return Err(Error::InvalidParameter(format!("generator is not Hermitian (error {herm:e})")));
    }
    Ok(obj.value(gen))
}

/// Generator reproducing `N²t²/(1+Nℓ)` for a unital map in the canonical Kraus basis.
pub fn unital_ansatz(eta_perp: f64, eta_par: f64, n: u64) -> Mat4 {
    let nf = n as f64;
    let (e2, s) = (eta_perp * eta_perp, 1.0 + eta_par);
    let den = s - 2.0 * e2;
    let mut m = Mat4::zeros();
    m[(2, 2)] = c(0.5);
    m[(3, 3)] = c(0.5);
    if den > RANK_FLOOR {
        let b = e2 / (nf * s - 2.0 * e2 * (nf - 1.0));
        let h = (e2 - b * s) / den;
        let g = (0.25 * s * s - e2).max(0.0).sqrt() * (1.0 - 2.0 * b) / den;
        m[(0, 0)] = c(h);
        m[(1, 1)] = c(-h);
        m[(2, 3)] = c(g);
        m[(3, 2)] = c(g);
    }
    m
}

/// Generator reproducing `N²t²/(1+Nr)` for amplitude damping (tight for `N ≥ 2`).
pub fn ad_ansatz(kappa: f64, n: u64) -> Mat4 {
    let nf = n as f64;
    let den = 4.0 + (nf - 4.0) * kappa;
    let b = 2.0 * (1.0 - kappa) / den;
    // (1−κ−b(2−κ))/κ with the factor κ cancelled
    let h = (1.0 - kappa) * (nf - 2.0) / den;
    Mat4::from_diagonal(&nalgebra::Vector4::new(c(h), c(0.0), c(b), c(0.0)))
}

fn sigma_x() -> Mat2 {
    Mat2::new(c(0.0), c(1.0), c(1.0), c(0.0))
}

/// Compression of the mixture construction into the canonical Kraus basis of `map`.
///
/// The mixture's Kraus family `Sₐ = Σᵢ uₐᵢ Kᵢ` with block generator 𝔥 maps to
/// `𝔥′ = u†𝔥u + (i/t)u†u̇`, whose objective never exceeds the mixture bound at the same `p`.
pub fn mixture_seed(map: &PhaseCovariantMap, n: u64, t: f64) -> Result<Mat4> {
    let canon = map.canonical_kraus(t)?;
    let p = f_upper_general(map, n, t, PPolicy::Scan)?.p;
    let norm = map.normalized();
    let reflect = map.kappa < 0.0;
    let phi = if reflect { -map.phi } else { map.phi };

    let mut parts: Vec<(f64, PhaseCovariantMap, Mat4)> = Vec::new();
    if norm.kappa == 0.0 {
        parts.push((1.0, norm, unital_ansatz(norm.eta_perp, norm.eta_par, n)));
    } else {
        let d = crate::ce_bounds::decompose_mixture(&norm, p)?;
        if d.p > 0.0 {
            let ea = d.eta_par.clamp(-1.0, 1.0);
            let ep = d.eta_perp.abs().min(0.5 * (1.0 + ea));
            let shift = if d.eta_perp < 0.0 { std::f64::consts::PI } else { 0.0 };
            let u = PhaseCovariantMap::new(ep, ea, 0.0, phi + shift)?;
            parts.push((d.p, u, unital_ansatz(ep, ea, n)));
        }
        if d.p < 1.0 {
            let k = d.kappa.clamp(0.0, 1.0);
            parts.push((1.0 - d.p, PhaseCovariantMap::amplitude_damping(k).with_phi(phi), ad_ansatz(k, n)));
        }
    }
    if parts.len() == 1 && !reflect {
        // a single component already is the canonical set
        return Ok(parts[0].2);
    }

    let m = 4 * parts.len();
    let mut ops = Vec::with_capacity(m);
    let mut derivs = Vec::with_capacity(m);
    let mut gen = DMatrix::<C64>::zeros(m, m);
    for (block, (w, part, g)) in parts.iter().enumerate() {
        let ks = part.canonical_kraus(t)?;
        let sw = c(w.sqrt());
        ops.extend(ks.ops.iter().map(|k| k * sw));
        derivs.extend(ks.derivs.iter().map(|k| k * sw));
        gen.view_mut((4 * block, 4 * block), (4, 4)).copy_from(g);
    }
    if reflect {
        // M_φ = X N_{−φ} X: conjugate by σx, flip the ω-derivatives and the generator
        let x = sigma_x();
        ops.iter_mut().for_each(|k| *k = x * *k * x);
        derivs.iter_mut().for_each(|k| *k = -(x * *k * x));
        gen = -gen;
    }

    let inner = |a: &Mat2, b: &Mat2| (a.adjoint() * b).trace();
    let mut u = DMatrix::<C64>::zeros(m, 4);
    let mut du = DMatrix::<C64>::zeros(m, 4);
    for i in 0..4 {
        let lam = inner(&canon.ops[i], &canon.ops[i]).re;
        if lam <= RANK_FLOOR {
            continue;
        }
        for a in 0..m {
            u[(a, i)] = inner(&canon.ops[i], &ops[a]) / lam;
            du[(a, i)] = (inner(&canon.derivs[i], &ops[a]) + inner(&canon.ops[i], &derivs[a])) / lam;
        }
    }
    let mut h = u.adjoint() * &gen * &u;
    if t != 0.0 {
        h += u.adjoint() * du * (I / t);
    }
    let h = (&h + h.adjoint()) * c(0.5);
    Ok(Mat4::from_fn(|i, j| h[(i, j)]))
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub restarts: usize,
    pub seed: u64,
    pub nelder_mead: NelderMeadOptions,
    /// Extra deterministic seed, e.g. the optimum at a nearby time.
    pub warm_start: Option<Mat4>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            restarts: RESTARTS,
            seed: 0,
            nelder_mead: NelderMeadOptions::default(),
            warm_start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausMinimum {
    pub f_num: f64,
    pub gen: Mat4,
    pub evaluations: usize,
    /// Set when the best restart ran out of evaluations before converging.
    pub flagged: bool,
}

fn deterministic_seeds(obj: &KrausObjective, opts: &MinimizeOptions) -> Vec<Mat4> {
    let mut seeds = Vec::new();
    if let Some(map) = obj.map {
        if let Ok(s) = mixture_seed(&map, obj.n, obj.t) {
            seeds.push(s);
        }
        seeds.push(unital_ansatz(map.eta_perp, map.eta_par, obj.n));
    }
    if let Some(w) = opts.warm_start {
        seeds.push(w);
    }
    seeds.push(Mat4::zeros());
    seeds.retain(|s| s.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    seeds
}

/// Minimizes the objective by Nelder–Mead over the 16 generator parameters.
///
/// Deterministic seeds (mixture compression, unital ansatz, warm start, zero) come first;
/// the remaining restarts perturb the best of them. Restarts run in parallel and the result
/// does not depend on the thread count.
pub fn minimize(obj: &KrausObjective, opts: &MinimizeOptions) -> KrausMinimum {
    let det = deterministic_seeds(obj, opts);
    let mut starts: Vec<[f64; 16]> = det.iter().map(herm4_to_params).collect();
    let values: Vec<f64> = starts.iter().map(|x| obj.value_params(x)).collect();
    let best_seed = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| starts[i])
        .unwrap_or([0.0; 16]);
    let restarts = opts.restarts.max(1);
    starts.truncate(restarts);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while starts.len() < restarts {
        let mut x = best_seed;
        for xi in x.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *xi += PERTURBATION_SCALE * xi.abs().max(1.0) * z;
        }
        starts.push(x);
    }

    let runs: Vec<_> = starts
        .par_iter()
        .map(|x0| {
            let steps: Vec<f64> = x0.iter().map(|x| PERTURBATION_SCALE * x.abs().max(1.0)).collect();
            nelder_mead(|x| obj.value_params(x), x0, &steps, &opts.nelder_mead)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let best = runs
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one restart");
    let zero = obj.value(&Mat4::zeros());
    if zero < best.value {
        return KrausMinimum {
            f_num: zero,
            gen: Mat4::zeros(),
            evaluations,
            flagged: !best.converged,
        };
    }
    KrausMinimum {
        f_num: best.value,
        gen: herm4_from_params(&best.x),
        evaluations,
        flagged: !best.converged,
    }
}

/// `F_num` for `map` at `(N, t)`.
pub fn f_num(map: &PhaseCovariantMap, n: u64, t: f64, opts: &MinimizeOptions) -> Result<KrausMinimum> {
    Ok(minimize(&KrausObjective::from_map(map, n, t)?, opts))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericOptimum {
    pub optimum: TimeOptimum,
    pub gen: Mat4,
    /// Some Kraus minimization along the way exhausted its budget.
    pub flagged: bool,
}

/// Bracket `[t_a/4, 4t_a]` around the optimum `t_a` of the analytic mixture bound.
pub fn numeric_bracket(traj: &MapTrajectory, n: u64) -> Result<(f64, f64)> {
    let ta = optimize_time(traj, n, None)?.optimum.t_opt;
    Ok((0.25 * ta, (4.0 * ta).min(traj.t_max())))
}

/// Time-optimized numeric bound: log grid plus golden refinement inside `bracket`
/// (default [`numeric_bracket`]), warm-starting each minimization from the previous one.
pub fn optimize_time_numeric(
    traj: &MapTrajectory,
    n: u64,
    bracket: Option<(f64, f64)>,
    opts: &MinimizeOptions,
) -> Result<NumericOptimum> {
    let (lo, hi) = match bracket {
        Some(b) => b,
        None => numeric_bracket(traj, n)?,
    };
    let state = RefCell::new((opts.warm_start, false));
    let eval = |t: f64| -> Result<KrausMinimum> {
        let mut o = *opts;
        o.warm_start = state.borrow().0;
        let r = f_num(&traj.at(t), n, t, &o)?;
        let mut s = state.borrow_mut();
        s.0 = Some(r.gen);
        s.1 |= r.flagged;
        Ok(r)
    };
    let m = minimize_log_grid(
        |t| match eval(t) {
            Ok(r) if r.f_num > 0.0 => t / r.f_num,
            _ => f64::INFINITY,
        },
        lo,
        hi,
        NUMERIC_TIME_POINTS,
        NUMERIC_TIME_TOL,
    )?;
    let at = eval(m.x)?;
    let flagged = state.borrow().1;
    Ok(NumericOptimum {
        optimum: TimeOptimum {
            n,
            t_opt: m.x,
            mse_t: m.x / at.f_num,
            qfi: at.f_num,
            converged: m.converged,
        },
        gen: at.gen,
        flagged,
    })
}

/// Numeric bound for each `N`; `converged` is false when the time search hit the bracket edge
/// or a minimization was flagged.
pub fn numeric_curve(
    traj: &MapTrajectory,
    exponent: f64,
    ns: &[u64],
    opts: &MinimizeOptions,
) -> Result<Vec<BoundRecord>> {
    ns.iter()
        .map(|&n| {
            let o = optimize_time_numeric(traj, n, None, opts)?;
            let mut r = BoundRecord::from_optimum(&o.optimum, exponent);
            r.converged &= !o.flagged;
            Ok(r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ce_bounds::{f_upper_ad, f_upper_unital};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn ansatz_values() {
        for &(ep, ea, n, t) in &[(0.6, 0.5, 7u64, 0.4), (0.3, -0.2, 1, 1.3), (0.95, 0.92, 300, 0.05)] {
            let map = PhaseCovariantMap::unital(ep, ea).with_phi(0.3);
            let obj = KrausObjective::from_map(&map, n, t).unwrap();
            let v = objective(&unital_ansatz(ep, ea, n), &obj).unwrap();
            assert!(rel(v, f_upper_unital(ep, ea, n, t).unwrap()) < 1e-9);
        }
        for &(k, n, t) in &[(0.3, 2u64, 0.7), (0.05, 40, 1.1), (0.9, 1000, 0.2)] {
            let obj = KrausObjective::from_map(&PhaseCovariantMap::amplitude_damping(k), n, t).unwrap();
            let v = objective(&ad_ansatz(k, n), &obj).unwrap();
            assert!(rel(v, f_upper_ad(k, n, t).unwrap()) < 1e-9);
        }
    }

    #[test]
    fn mixture_seed_below_mixture_bound() {
        for &(ep, ea, k, phi) in &[
            (0.6, 0.5, 0.2, 0.0),
            (0.6, 0.5, -0.2, 0.7),
            (0.8, 0.7, 0.05, 1.0),
            (0.3, 0.1, -0.6, -0.4),
        ] {
            let map = PhaseCovariantMap::new(ep, ea, k, phi).unwrap();
            for n in [1u64, 3, 50] {
                let t = 0.6;
                let obj = KrausObjective::from_map(&map, n, t).unwrap();
                let seed = mixture_seed(&map, n, t).unwrap();
                let bound = f_upper_general(&map, n, t, PPolicy::Scan).unwrap().value;
                let v = objective(&seed, &obj).unwrap();
                assert!(v <= bound * (1.0 + 1e-10), "{map:?} N={n}: {v} > {bound}");
            }
        }
    }

    #[test]
    fn noiseless_reaches_heisenberg() {
        let (n, t) = (5u64, 0.8);
        let r = f_num(&PhaseCovariantMap::IDENTITY, n, t, &MinimizeOptions::default()).unwrap();
        assert!(rel(r.f_num, (n as f64 * t).powi(2)) < 1e-9);
    }

    #[test]
    fn global_phase_is_not_a_symmetry() {
        let map = PhaseCovariantMap::new(0.6, 0.5, 0.2, 0.1).unwrap();
        let obj = KrausObjective::from_map(&map, 4, 0.5).unwrap();
        let g = mixture_seed(&map, 4, 0.5).unwrap();
        let shifted = g + Mat4::identity() * c(0.37);
        let (a, b) = (objective(&g, &obj).unwrap(), objective(&shifted, &obj).unwrap());
        assert!(rel(a, b) > 1e-3);
    }

    #[test]
    fn minimize_improves_on_seed() {
        let map = PhaseCovariantMap::new(0.7, 0.6, -0.15, 0.0).unwrap();
        let (n, t) = (20u64, 0.5);
        let obj = KrausObjective::from_map(&map, n, t).unwrap();
        let r = minimize(&obj, &MinimizeOptions::default());
        let seed = objective(&mixture_seed(&map, n, t).unwrap(), &obj).unwrap();
        assert!(r.f_num <= seed);
        assert!(r.f_num <= objective(&Mat4::zeros(), &obj).unwrap());
        assert!((objective(&r.gen, &obj).unwrap() - r.f_num).abs() <= 1e-12 * r.f_num);
    }
}
