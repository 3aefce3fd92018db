//! Thin wrappers over `nalgebra` for the complex dense matrices used by both
//! engines.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Truncated annihilation operator on `dim` Fock levels.
pub fn annihilation(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new(crate::math::sqrt(n as f64), 0.0);
    }
    a
}

/// `exp(G)` for anti-Hermitian `G`, through the eigendecomposition of the
/// Hermitian `H = iG`: `exp(G) = V e^{-iΛ} V^†`.
pub fn expm_anti_hermitian(g: &CMatrix) -> CMatrix {
    let h = g * C64::new(0.0, 1.0);
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let phases = eig.eigenvalues.map(|l| C64::new(crate::math::cos(l), -crate::math::sin(l)));
    let v = eig.eigenvectors;
    let scaled = CMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * phases[j]);
    scaled * v.adjoint()
}

/// Largest entry of `|M - M^†|`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending. The input is symmetrised
/// first, so round-off asymmetry does not leak into the spectrum.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigenvalues();
    let mut values: Vec<f64> = eig.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    values
}

/// Thin singular value decomposition `M = Σ_s σ_s u_s r_s^T` with singular
/// values in descending order. Returns `(σ_s, u_s, r_s)` triples where
/// `r_s` is the `s`-th row of `V^†`.
pub fn svd_terms(m: &CMatrix) -> Vec<(f64, CVector, CVector)> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    order
        .into_iter()
        .map(|s| {
            let left = u.column(s).into_owned();
            let right = v_t.row(s).transpose().into_owned();
            (svd.singular_values[s], left, right)
        })
        .collect()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
