//! Brute-force QFI of small probe-plus-ancilla registers, used as ground truth for the
//! closed forms and bounds.
//!
//! Qubit 0 is the most significant bit of a basis index; `|0⟩` is the σz = +1 state.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{c, Mat2, C64};
use crate::qubit_channel::PhaseCovariantMap;

/// Largest register handled by default (6 probes + 6 ancillae).
pub const MAX_QUBITS: usize = 12;
/// Eigenvalue pairs with `λk + λl` below this fraction of the trace are dropped.
pub const QFI_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        let d = mat.nrows();
        if d != mat.ncols() || !d.is_power_of_two() || d < 2 {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} is not a qubit-register operator",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self {
            n_qubits: d.trailing_zeros() as usize,
            mat,
        })
    }

    pub fn from_pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let v = psi / c(norm);
        Self::from_matrix(&v * v.adjoint())
    }

    /// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
    pub fn ghz(n: usize) -> Result<Self> {
        let d = 1usize << n;
        let mut psi = DVector::zeros(d);
        psi[0] = c(1.0);
        psi[d - 1] = c(1.0);
        Self::from_pure(&psi)
    }

    /// Haar-random pure state (normalized complex Gaussian vector).
    pub fn random_pure(n_qubits: usize, rng: &mut impl Rng) -> Result<Self> {
        Self::from_pure(&random_state_vector(n_qubits, rng))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.mat - self.mat.adjoint())
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.mat.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Trace 1, Hermitian and positive semidefinite within the oracle tolerances.
    pub fn validate(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - c(1.0)).norm() > 1e-12 {
            return Err(Error::InvalidParameter(format!("trace {tr} ≠ 1")));
        }
        if self.hermiticity_error() > 1e-12 {
            return Err(Error::InvalidParameter("state is not Hermitian".into()));
        }
        let min = self.eigenvalues()[0];
        if min < -1e-10 {
            return Err(Error::InvalidParameter(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn mix(a: &Self, b: &Self, p: f64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch("states of different size".into()));
        }
        Self::from_matrix(&a.mat * c(p) + &b.mat * c(1.0 - p))
    }
}

pub fn random_state_vector(n_qubits: usize, rng: &mut impl Rng) -> DVector<C64> {
    let d = 1usize << n_qubits;
    let v = DVector::from_fn(d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let n = v.norm();
    v / c(n)
}

fn check_indices(n_qubits: usize, probes: &[usize]) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::DimensionMismatch(format!(
            "{n_qubits} qubits exceed the oracle cap of {MAX_QUBITS}"
        )));
    }
    for (i, &p) in probes.iter().enumerate() {
        if p >= n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "probe index {p} outside a {n_qubits}-qubit register"
            )));
        }
        if probes[..i].contains(&p) {
            return Err(Error::InvalidParameter(format!("probe index {p} repeated")));
        }
    }
    Ok(())
}

/// Applies the channel (through its canonical Kraus operators) to each probe qubit.
pub fn evolve(
    state: &DensityMatrix,
    map: &PhaseCovariantMap,
    t: f64,
    probes: &[usize],
) -> Result<DensityMatrix> {
    check_indices(state.n_qubits, probes)?;
    let kraus = map.canonical_kraus(t)?;
    let ops: Vec<(Mat2, Mat2)> = kraus
        .ops
        .iter()
        .filter(|k| k.iter().any(|z| z.norm() > 0.0))
        .map(|k| (*k, k.adjoint()))
        .collect();
    let mut rho = state.mat.clone();
    let n = state.n_qubits;
    let d = state.dim();
    for &q in probes {
        let bit = 1usize << (n - 1 - q);
        let mut out = DMatrix::zeros(d, d);
        for r in (0..d).filter(|r| r & bit == 0) {
            for col in (0..d).filter(|c| c & bit == 0) {
                let rows = [r, r | bit];
                let cols = [col, col | bit];
                let block = Mat2::new(
                    rho[(rows[0], cols[0])],
                    rho[(rows[0], cols[1])],
                    rho[(rows[1], cols[0])],
                    rho[(rows[1], cols[1])],
                );
                let mut acc = Mat2::zeros();
                for (k, kd) in &ops {
                    acc += k * block * kd;
                }
                for x in 0..2 {
                    for y in 0..2 {
                        out[(rows[x], cols[y])] = acc[(x, y)];
                    }
                }
            }
        }
        rho = out;
    }
    Ok(DensityMatrix {
        n_qubits: n,
        mat: rho,
    })
}

fn jz_diagonal(n_qubits: usize, probes: &[usize]) -> Vec<f64> {
    (0..1usize << n_qubits)
        .map(|a| {
            probes
                .iter()
                .map(|&q| if a >> (n_qubits - 1 - q) & 1 == 0 { 1.0 } else { -1.0 })
                .sum()
        })
        .collect()
}

/// `∂ω ρ = −i (t/2) [J_z, ρ]` with `J_z = Σ_probes σz`.
pub fn omega_derivative(state_out: &DensityMatrix, t: f64, probes: &[usize]) -> Result<DensityMatrix> {
    check_indices(state_out.n_qubits, probes)?;
    let jz = jz_diagonal(state_out.n_qubits, probes);
    let d = state_out.dim();
    let mat = DMatrix::from_fn(d, d, |a, b| {
        state_out.mat[(a, b)] * C64::new(0.0, -0.5 * t * (jz[a] - jz[b]))
    });
    Ok(DensityMatrix {
        n_qubits: state_out.n_qubits,
        mat,
    })
}

/// `F = 2 Σ |⟨k|∂ρ|l⟩|²/(λk + λl)` over eigenpairs with `λk + λl > 1e-12·Tr ρ`.
pub fn qfi(state: &DensityMatrix, dstate: &DensityMatrix) -> Result<f64> {
    if state.dim() != dstate.dim() {
        return Err(Error::DimensionMismatch("state and derivative differ in size".into()));
    }
    let eig = state.mat.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let dk = v.adjoint() * &dstate.mat * v;
    let cut = QFI_CUTOFF * state.trace().re;
    let lam = &eig.eigenvalues;
    let mut f = 0.0;
    for k in 0..state.dim() {
        for l in 0..state.dim() {
            let s = lam[k] + lam[l];
            if s > cut {
                f += dk[(k, l)].norm_sqr() / s;
            }
        }
    }
    Ok(2.0 * f)
}

/// QFI of `Λ^{⊗N} ⊗ 𝟙^{⊗N_A}` applied to `input`, probes first.
pub fn oracle_qfi(input: &DensityMatrix, map: &PhaseCovariantMap, n_probes: usize, t: f64) -> Result<f64> {
    if n_probes == 0 || n_probes > input.n_qubits {
        return Err(Error::DimensionMismatch(format!(
            "{n_probes} probes in a {}-qubit register",
            input.n_qubits
        )));
    }
    let probes: Vec<usize> = (0..n_probes).collect();
    let out = evolve(input, map, t, &probes)?;
    let d = omega_derivative(&out, t, &probes)?;
    qfi(&out, &d)
}
