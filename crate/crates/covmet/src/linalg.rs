//! Small dense complex matrices and the closed-form 2×2 norms used in inner loops.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest |eigenvalue| of a Hermitian 2×2 matrix (only the upper triangle and diagonal are read).
#[inline]
pub fn herm2_norm(m: &Mat2) -> f64 {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)].norm_sqr();
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let r = (half * half + b).sqrt();
    (mean + r).abs().max((mean - r).abs())
}

/// Operator norm (largest singular value) of a general 2×2 matrix.
#[inline]
pub fn op_norm2(m: &Mat2) -> f64 {
    let g = m.adjoint() * m;
    herm2_norm(&g).sqrt()
}

/// Hermitian 4×4 matrix from 16 reals: four diagonal entries, then (Re, Im) of the
/// upper-triangle entries in the order (0,1), (0,2), (0,3), (1,2), (1,3), (2,3).
pub fn herm4_from_params(x: &[f64]) -> Mat4 {
    assert_eq!(x.len(), 16, "a Hermitian 4×4 generator has 16 real parameters");
    let mut m = Mat4::zeros();
    for i in 0..4 {
        m[(i, i)] = c(x[i]);
    }
    let mut k = 4;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let z = C64::new(x[k], x[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Inverse of [`herm4_from_params`]; the lower triangle is ignored.
pub fn herm4_to_params(m: &Mat4) -> [f64; 16] {
    let mut x = [0.0; 16];
    for i in 0..4 {
        x[i] = m[(i, i)].re;
    }
    let mut k = 4;
    for i in 0..4 {
        for j in (i + 1)..4 {
            x[k] = m[(i, j)].re;
            x[k + 1] = m[(i, j)].im;
            k += 2;
        }
    }
    x
}

/// Eigenvalues of a Hermitian 4×4 matrix in ascending order.
pub fn herm4_eigenvalues(m: &Mat4) -> Vec<f64> {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Largest entry modulus.
pub fn max_abs<'a>(entries: impl IntoIterator<Item = &'a C64>) -> f64 {
    entries.into_iter().fold(0.0, |m, z| m.max(z.norm()))
}
