//! Phase-covariant qubit maps.
//!
//! A map is stored as `(η⊥, η∥, κ, φ)` and acts on Bloch vectors as
//! `v ↦ (0, 0, κ) + M v` with `M = [[η⊥ cos φ, −η⊥ sin φ, 0], [η⊥ sin φ, η⊥ cos φ, 0], [0, 0, η∥]]`.
//! `|0⟩` is the north pole, so `κ > 0` pushes states towards `|0⟩`.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix4;

use crate::error::{finite, Error, Result};
use crate::linalg::{c, herm4_eigenvalues, max_abs, Mat2, Mat4, C64, I};

/// Tolerance on the three CPTP inequality margins.
pub const CPTP_TOL: f64 = 1e-9;
/// Smallest Choi eigenvalue still accepted as positive semidefinite.
pub const CHOI_FLOOR: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_physical(&self) -> bool {
        self.norm() <= 1.0 + 1e-12
    }

    /// Rotation by `delta` about the z axis.
    pub fn rotate_z(&self, delta: f64) -> Self {
        let (s, co) = delta.sin_cos();
        Self::new(co * self.x - s * self.y, s * self.x + co * self.y, self.z)
    }

    /// `ρ = (𝟙 + xσx + yσy + zσz)/2`.
    pub fn to_density(&self) -> Mat2 {
        Mat2::new(
            c(0.5 * (1.0 + self.z)),
            C64::new(0.5 * self.x, -0.5 * self.y),
            C64::new(0.5 * self.x, 0.5 * self.y),
            c(0.5 * (1.0 - self.z)),
        )
    }

    /// Bloch components `Tr(ρσ)` of a (not necessarily normalized) 2×2 matrix.
    pub fn from_density(rho: &Mat2) -> Self {
        let off = rho[(1, 0)] + rho[(0, 1)].conj();
        Self::new(off.re, off.im, (rho[(0, 0)] - rho[(1, 1)]).re)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        BlochVector::new(self.x - other.x, self.y - other.y, self.z - other.z).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub is_cptp: bool,
    /// `1 − (η∥ + κ)`, `1 − (η∥ − κ)`, `1 + η∥ − √(4η⊥² + κ²)`.
    pub margins: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCovariantMap {
    pub eta_perp: f64,
    pub eta_par: f64,
    pub kappa: f64,
    pub phi: f64,
}

impl Default for PhaseCovariantMap {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl PhaseCovariantMap {
    pub const IDENTITY: Self = Self {
        eta_perp: 1.0,
        eta_par: 1.0,
        kappa: 0.0,
        phi: 0.0,
    };

    /// Checks finiteness and `η⊥ ≥ 0`; CPTP is checked separately by [`Self::validate_cptp`].
    pub fn new(eta_perp: f64, eta_par: f64, kappa: f64, phi: f64) -> Result<Self> {
        finite("eta_perp", eta_perp)?;
        finite("eta_par", eta_par)?;
        finite("kappa", kappa)?;
        finite("phi", phi)?;
        if eta_perp < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eta_perp = {eta_perp} must be non-negative"
            )));
        }
        Ok(Self {
            eta_perp,
            eta_par,
            kappa,
            phi,
        })
    }

    pub fn identity() -> Self {
        Self::IDENTITY
    }

    pub fn dephasing(eta_perp: f64) -> Self {
        Self {
            eta_perp,
            ..Self::IDENTITY
        }
    }

    pub fn unital(eta_perp: f64, eta_par: f64) -> Self {
        Self {
            eta_perp,
            eta_par,
            kappa: 0.0,
            phi: 0.0,
        }
    }

    /// Amplitude damping towards `|0⟩`: `η⊥ = √(1−κ)`, `η∥ = 1−κ`.
    pub fn amplitude_damping(kappa: f64) -> Self {
        Self {
            eta_perp: (1.0 - kappa).max(0.0).sqrt(),
            eta_par: 1.0 - kappa,
            kappa,
            phi: 0.0,
        }
    }

    pub fn with_phi(self, phi: f64) -> Self {
        Self { phi, ..self }
    }

    /// Flips the z axis if needed so that `κ ≥ 0`; the estimation problem is unchanged.
    pub fn normalized(self) -> Self {
        Self {
            kappa: self.kappa.abs(),
            ..self
        }
    }

    pub fn is_unital(&self) -> bool {
        self.kappa == 0.0
    }

    pub fn cptp_margins(&self) -> [f64; 3] {
        [
            1.0 - (self.eta_par + self.kappa),
            1.0 - (self.eta_par - self.kappa),
            1.0 + self.eta_par
                - (4.0 * self.eta_perp * self.eta_perp + self.kappa * self.kappa).sqrt(),
        ]
    }

    pub fn validate_cptp(&self) -> Result<ValidationReport> {
        finite("eta_perp", self.eta_perp)?;
        finite("eta_par", self.eta_par)?;
        finite("kappa", self.kappa)?;
        finite("phi", self.phi)?;
        let margins = self.cptp_margins();
        Ok(ValidationReport {
            is_cptp: margins.iter().all(|&m| m >= -CPTP_TOL),
            margins,
        })
    }

    pub fn is_cptp(&self) -> bool {
        self.validate_cptp().map(|r| r.is_cptp).unwrap_or(false)
    }

    pub(crate) fn require_cptp(&self) -> Result<()> {
        let r = self.validate_cptp()?;
        if r.is_cptp {
            Ok(())
        } else {
            Err(Error::NotCptp(format!("{:?} has margins {:?}", self, r.margins)))
        }
    }

    /// 4×4 real matrix acting on `(1, x, y, z)`.
    pub fn to_affine_matrix(&self) -> Matrix4<f64> {
        let (s, co) = self.phi.sin_cos();
        let e = self.eta_perp;
        #[rustfmt::skip]
        let m = Matrix4::new(
            1.0,        0.0,    0.0,    0.0,
            0.0,        e * co, -e * s, 0.0,
            0.0,        e * s,  e * co, 0.0,
            self.kappa, 0.0,    0.0,    self.eta_par,
        );
        m
    }

    pub fn apply(&self, v: BlochVector) -> BlochVector {
        let (s, co) = self.phi.sin_cos();
        let e = self.eta_perp;
        BlochVector::new(
            e * (co * v.x - s * v.y),
            e * (s * v.x + co * v.y),
            self.kappa + self.eta_par * v.z,
        )
    }

    /// Action on an arbitrary 2×2 operator (linear extension of the affine map).
    pub fn apply_operator(&self, op: &Mat2) -> Mat2 {
        let tr = op[(0, 0)] + op[(1, 1)];
        let z = op[(0, 0)] - op[(1, 1)];
        let rot = C64::from_polar(self.eta_perp, -self.phi);
        let d0 = 0.5 * (tr * (1.0 + self.kappa) + z * self.eta_par);
        let d1 = 0.5 * (tr * (1.0 - self.kappa) - z * self.eta_par);
        Mat2::new(d0, rot * op[(0, 1)], rot.conj() * op[(1, 0)], d1)
    }

    pub fn choi(&self) -> ChoiMatrix {
        let (ea, k) = (self.eta_par, self.kappa);
        let corner = C64::from_polar(self.eta_perp, -self.phi);
        let mut m = Mat4::zeros();
        m[(0, 0)] = c(0.5 * (1.0 + ea + k));
        m[(1, 1)] = c(0.5 * (1.0 - ea + k));
        m[(2, 2)] = c(0.5 * (1.0 - ea - k));
        m[(3, 3)] = c(0.5 * (1.0 + ea - k));
        m[(0, 3)] = corner;
        m[(3, 0)] = corner.conj();
        ChoiMatrix(m)
    }

    /// Canonical Kraus operators and their ω-derivatives at interrogation time `t`.
    pub fn canonical_kraus(&self, t: f64) -> Result<KrausSet> {
        finite("t", t)?;
        self.require_cptp()?;
        let (ea, k, ep) = (self.eta_par, self.kappa, self.eta_perp);
        let w1 = weight("(1 − η∥ + κ)/2", 0.5 * (1.0 - ea + k))?;
        let w2 = weight("(1 − η∥ − κ)/2", 0.5 * (1.0 - ea - k))?;
        let s = (k * k + 4.0 * ep * ep).sqrt();
        let lp = weight("λ+", 0.5 * (1.0 + ea + s))?;
        let lm = weight("λ−", 0.5 * (1.0 + ea - s))?;
        // cot ϑ = (κ + s)/(2η⊥); for κ < 0 use the cancellation-free form 2η⊥/(s − κ).
        let theta = if ep == 0.0 && k == 0.0 {
            std::f64::consts::FRAC_PI_4
        } else if k >= 0.0 {
            (2.0 * ep).atan2(k + s)
        } else {
            (s - k).atan2(2.0 * ep)
        };
        let (st, ct) = theta.sin_cos();
        let ph = C64::from_polar(1.0, self.phi);
        let z = C64::new(0.0, 0.0);
        let k1 = Mat2::new(z, c(w1.sqrt()), z, z);
        let k2 = Mat2::new(z, z, c(w2.sqrt()), z);
        let k3 = Mat2::new(c(lp.sqrt() * ct), z, z, ph * (lp.sqrt() * st));
        let k4 = Mat2::new(c(-lm.sqrt() * st), z, z, ph * (lm.sqrt() * ct));
        let dk = |m: &Mat2| Mat2::new(z, z, z, I * t * m[(1, 1)]);
        Ok(KrausSet {
            ops: [k1, k2, k3, k4],
            derivs: [Mat2::zeros(), Mat2::zeros(), dk(&k3), dk(&k4)],
        })
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            eta_perp: self.eta_perp * other.eta_perp,
            eta_par: self.eta_par * other.eta_par,
            kappa: self.kappa + self.eta_par * other.kappa,
            phi: self.phi + other.phi,
        }
    }

    /// Convex combination `p·a + (1−p)·b` of two maps.
    ///
    /// The transverse blocks combine as complex numbers `η⊥ e^{iφ}`.
    pub fn mix(a: &Self, b: &Self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("mixing weight {p} not in [0, 1]")));
        }
        let z = C64::from_polar(a.eta_perp, a.phi) * p + C64::from_polar(b.eta_perp, b.phi) * (1.0 - p);
        let (r, arg) = z.to_polar();
        Ok(Self {
            eta_perp: r,
            eta_par: p * a.eta_par + (1.0 - p) * b.eta_par,
            kappa: p * a.kappa + (1.0 - p) * b.kappa,
            phi: if r == 0.0 { 0.0 } else { arg },
        })
    }
}

fn weight(name: &str, w: f64) -> Result<f64> {
    if w < -CPTP_TOL {
        Err(Error::NotCptp(format!("negative Kraus weight {name} = {w}")))
    } else {
        Ok(w.max(0.0))
    }
}

impl fmt::Display for PhaseCovariantMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "eta_perp={}", self.eta_perp)?;
        writeln!(f, "eta_par={}", self.eta_par)?;
        writeln!(f, "kappa={}", self.kappa)?;
        writeln!(f, "phi={}", self.phi)
    }
}

impl FromStr for PhaseCovariantMap {
    type Err = Error;

    /// Parses `key=value` lines; `phi` is optional and defaults to 0.
    fn from_str(s: &str) -> Result<Self> {
        let mut vals: [Option<f64>; 4] = [None; 4];
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{line}`")))?;
            let idx = match key.trim() {
                "eta_perp" => 0,
                "eta_par" => 1,
                "kappa" => 2,
                "phi" => 3,
                other => return Err(Error::Parse(format!("unknown key `{other}`"))),
            };
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("{key}: {e}")))?;
            vals[idx] = Some(v);
        }
        let get = |i: usize, name: &str| vals[i].ok_or_else(|| Error::Parse(format!("missing `{name}`")));
        Self::new(
            get(0, "eta_perp")?,
            get(1, "eta_par")?,
            get(2, "kappa")?,
            vals[3].unwrap_or(0.0),
        )
    }
}

/// Choi matrix `Σ_{jk} Λ(|j⟩⟨k|) ⊗ |j⟩⟨k|` (row index `2a + j`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix(pub Mat4);

impl ChoiMatrix {
    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        max_abs((self.0 - self.0.adjoint()).iter())
    }

    /// Eigenvalues in ascending order from a dense Hermitian eigensolve.
    pub fn eigenvalues(&self) -> Vec<f64> {
        herm4_eigenvalues(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= CHOI_FLOOR
    }
}

/// Four Kraus operators and their derivatives with respect to ω at fixed t.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub ops: [Mat2; 4],
    pub derivs: [Mat2; 4],
}

impl KrausSet {
    /// `‖Σ K†K − 𝟙‖_max`.
    pub fn completeness_error(&self) -> f64 {
        let s: Mat2 = self.ops.iter().map(|k| k.adjoint() * k).sum();
        max_abs((s - Mat2::identity()).iter())
    }

    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        self.ops.iter().map(|k| k * rho * k.adjoint()).sum()
    }

    /// Choi matrix rebuilt as `Σ |K⟩⟨K|` with `|K⟩ = (K ⊗ 𝟙) Σ_j |j j⟩`.
    pub fn choi(&self) -> ChoiMatrix {
        let mut m = Mat4::zeros();
        for k in &self.ops {
            let v = nalgebra::Vector4::new(k[(0, 0)], k[(0, 1)], k[(1, 0)], k[(1, 1)]);
            m += v * v.adjoint();
        }
        ChoiMatrix(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn validate_examples() {
        assert!(PhaseCovariantMap::IDENTITY.validate_cptp().unwrap().is_cptp);
        let bad = PhaseCovariantMap::new(1.0, 0.5, 0.0, 0.0).unwrap();
        let r = bad.validate_cptp().unwrap();
        assert!(!r.is_cptp);
        assert_abs_diff_eq!(r.margins[2], -0.5, epsilon = 1e-15);
        let ad = PhaseCovariantMap::amplitude_damping(0.5);
        assert!(ad.validate_cptp().unwrap().is_cptp);
        let nan = PhaseCovariantMap { kappa: f64::NAN, ..PhaseCovariantMap::IDENTITY };
        assert_eq!(nan.validate_cptp(), Err(Error::NonFinite("kappa")));
        assert!(PhaseCovariantMap::new(-0.1, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn affine_examples() {
        assert_eq!(PhaseCovariantMap::IDENTITY.to_affine_matrix(), Matrix4::identity());
        let m = PhaseCovariantMap::dephasing(0.5).to_affine_matrix();
        assert_eq!(m, Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 0.5, 0.5, 1.0)));
        let m = PhaseCovariantMap::new(0.5, 0.8, 0.1, std::f64::consts::FRAC_PI_2)
            .unwrap()
            .to_affine_matrix();
        assert_abs_diff_eq!(m[(1, 2)], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(2, 1)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 1)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(2, 2)], 0.0, epsilon = 1e-15);
        assert_eq!(m[(3, 0)], 0.1);
        assert_eq!(m[(3, 3)], 0.8);
    }

    #[test]
    fn apply_examples() {
        let v = BlochVector::new(0.3, 0.4, 0.5);
        assert_eq!(PhaseCovariantMap::IDENTITY.apply(v), v);
        let full = PhaseCovariantMap::new(0.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(full.apply(v), BlochVector::new(0.0, 0.0, 1.0));
        let e = (-0.2f64).exp();
        let out = PhaseCovariantMap::new(e, 1.0, 0.0, 0.7)
            .unwrap()
            .apply(BlochVector::new(1.0, 0.0, 0.0));
        assert!(out.distance(&BlochVector::new(e * 0.7f64.cos(), e * 0.7f64.sin(), 0.0)) < 1e-15);
    }

    #[test]
    fn affine_matrix_and_apply_agree() {
        let map = PhaseCovariantMap::new(0.6, 0.3, -0.2, 1.1).unwrap();
        let v = BlochVector::new(0.1, -0.5, 0.7);
        let w = map.to_affine_matrix() * nalgebra::Vector4::new(1.0, v.x, v.y, v.z);
        assert!(map.apply(v).distance(&BlochVector::new(w[1], w[2], w[3])) < 1e-15);
        let rho = map.apply_operator(&v.to_density());
        assert!(BlochVector::from_density(&rho).distance(&map.apply(v)) < 1e-15);
    }

    #[test]
    fn choi_examples() {
        let ev = PhaseCovariantMap::IDENTITY.choi().eigenvalues();
        for (a, b) in ev.iter().zip([0.0, 0.0, 0.0, 2.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let ev = PhaseCovariantMap::dephasing(0.5).choi().eigenvalues();
        for (a, b) in ev.iter().zip([0.0, 0.0, 0.5, 1.5]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let ch = PhaseCovariantMap::new(0.4, 0.2, 0.3, 0.9).unwrap().choi();
        assert_abs_diff_eq!(ch.trace(), 2.0, epsilon = 1e-15);
        assert!(ch.hermiticity_error() < 1e-15);
    }

    #[test]
    fn kraus_examples() {
        let ks = PhaseCovariantMap::IDENTITY.canonical_kraus(1.0).unwrap();
        assert!(max_abs((ks.ops[2] - Mat2::identity()).iter()) < 1e-15);
        assert!(max_abs(ks.ops[3].iter()) < 1e-15);
        let rho = BlochVector::new(0.2, -0.3, 0.4).to_density();
        assert!(max_abs((ks.apply(&rho) - rho).iter()) < 1e-15);

        let ks = PhaseCovariantMap::amplitude_damping(0.5).canonical_kraus(1.0).unwrap();
        assert_abs_diff_eq!(ks.ops[0][(0, 1)].re, 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(ks.completeness_error() < 1e-12);

        // κ = 0 gives ϑ = π/4: the two diagonal entries of K₃ have equal modulus.
        let ks = PhaseCovariantMap::new(0.3, 0.1, 0.0, 0.4).unwrap().canonical_kraus(2.0).unwrap();
        assert_abs_diff_eq!(ks.ops[2][(0, 0)].norm(), ks.ops[2][(1, 1)].norm(), epsilon = 1e-15);
        assert_abs_diff_eq!(ks.ops[3][(0, 0)].norm(), ks.ops[3][(1, 1)].norm(), epsilon = 1e-15);
    }

    #[test]
    fn kraus_derivatives_match_finite_difference() {
        let t = 1.7;
        let base = PhaseCovariantMap::new(0.5, 0.2, -0.3, 0.4).unwrap();
        let ks = base.canonical_kraus(t).unwrap();
        let h = 1e-6;
        let plus = base.with_phi(base.phi + h * t).canonical_kraus(t).unwrap();
        let minus = base.with_phi(base.phi - h * t).canonical_kraus(t).unwrap();
        for i in 0..4 {
            let fd = (plus.ops[i] - minus.ops[i]) / c(2.0 * h);
            assert!(max_abs((fd - ks.derivs[i]).iter()) < 1e-8);
        }
    }

    #[test]
    fn kraus_rejects_non_cptp() {
        let bad = PhaseCovariantMap::new(1.0, 0.5, 0.0, 0.0).unwrap();
        assert!(matches!(bad.canonical_kraus(1.0), Err(Error::NotCptp(_))));
    }

    #[test]
    fn kraus_reproduce_choi() {
        let map = PhaseCovariantMap::new(0.35, -0.1, 0.3, 2.3).unwrap();
        let ks = map.canonical_kraus(1.0).unwrap();
        assert!(max_abs((ks.choi().0 - map.choi().0).iter()) < 1e-14);
    }

    #[test]
    fn compose_examples() {
        let b = PhaseCovariantMap::new(0.3, 0.2, 0.1, 0.5).unwrap();
        assert_eq!(PhaseCovariantMap::IDENTITY.compose(&b), b);
        let d = PhaseCovariantMap::dephasing(0.8).compose(&PhaseCovariantMap::dephasing(0.5));
        assert_abs_diff_eq!(d.eta_perp, 0.4, epsilon = 1e-15);
        let a = PhaseCovariantMap::new(0.5, 0.5, 0.3, 0.0).unwrap();
        let b = PhaseCovariantMap::new(0.5, 0.9, 0.2, 0.0).unwrap();
        let ab = a.compose(&b);
        assert_abs_diff_eq!(ab.kappa, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(ab.eta_par, 0.45, epsilon = 1e-15);
        let prod = a.to_affine_matrix() * b.to_affine_matrix();
        assert!((prod - ab.to_affine_matrix()).amax() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let map = PhaseCovariantMap::new(0.25, -0.125, 0.3, 1.5).unwrap();
        let back: PhaseCovariantMap = map.to_string().parse().unwrap();
        assert_eq!(back, map);
        let short: PhaseCovariantMap = "eta_perp=1\neta_par=1\nkappa=0".parse().unwrap();
        assert_eq!(short, PhaseCovariantMap::IDENTITY);
        assert!("eta_perp=1\nfoo=2".parse::<PhaseCovariantMap>().is_err());
    }

    #[test]
    fn mix_matches_affine_combination() {
        let a = PhaseCovariantMap::new(0.5, 0.2, 0.1, 0.3).unwrap();
        let b = PhaseCovariantMap::new(0.7, 0.6, -0.2, -1.0).unwrap();
        let m = PhaseCovariantMap::mix(&a, &b, 0.35).unwrap();
        let lin = a.to_affine_matrix() * 0.35 + b.to_affine_matrix() * 0.65;
        assert!((m.to_affine_matrix() - lin).amax() < 1e-15);
    }
}
