//! Small dense helpers shared by the model and the optimizer.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;
pub type RVec = DVector<f64>;
pub type RMat = DMatrix<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Unconjugated bilinear product `aᵀb`.
pub fn dotu(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).fold(ZERO, |acc, (x, y)| acc + x * y)
}

/// Kronecker product of two column vectors, `(a ⊗ b)[i·len(b) + j] = a_i b_j`.
pub fn kron(a: &CVec, b: &CVec) -> CVec {
    let nb = b.len();
    CVec::from_fn(a.len() * nb, |idx, _| a[idx / nb] * b[idx % nb])
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn symmetric_part(m: &RMat) -> RMat {
    (m + m.transpose()).scale(0.5)
}

/// Largest eigenvalue of the Hermitian part of `m`.
pub fn hermitian_max_eigenvalue(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Largest eigenvalue of the symmetric part of a real matrix.
pub fn symmetric_max_eigenvalue(m: &RMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(symmetric_part(m));
    eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn hermitian_min_eigenvalue(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Principal eigenpair of a Hermitian matrix; the eigenvector has unit norm.
pub fn principal_eigenvector(m: &CMat) -> (f64, CVec) {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let normalized = if scale > 0.0 { m.unscale(scale) } else { m.clone() };
    let eig = SymmetricEigen::new(hermitian_part(&normalized));
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let v = eig.eigenvectors.column(best).into_owned();
    let norm = v.norm();
    (eig.eigenvalues[best] * scale, v.unscale(norm))
}

/// Largest eigenvalue of `Σ v vᴴ`, computed from the Gram matrix of the vectors.
pub fn gram_max_eigenvalue(vectors: &[CVec]) -> f64 {
    let n = vectors.len();
    if n == 0 {
        return 0.0;
    }
    let gram = CMat::from_fn(n, n, |i, j| vectors[i].dotc(&vectors[j]));
    hermitian_max_eigenvalue(&gram).max(0.0)
}

/// Entrywise complex conjugate.
pub fn conj(v: &CVec) -> CVec {
    v.map(|z| z.conj())
}

pub fn diag_mul(d: &CVec, m: &CMat) -> CMat {
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= d[i];
    }
    out
}

pub fn real_vec(v: &[f64]) -> RVec {
    RVec::from_column_slice(v)
}

/// Stacks `[Re v; Im v]`.
pub fn realify(v: &CVec) -> RVec {
    let n = v.len();
    RVec::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

/// Inverse of [`realify`].
pub fn complexify(v: &RVec) -> CVec {
    let n = v.len() / 2;
    CVec::from_fn(n, |i, _| C64::new(v[i], v[i + n]))
}

pub fn to_vecs(m: &CMat) -> Vec<CVec> {
    m.column_iter().map(|c| c.into_owned()).collect()
}
