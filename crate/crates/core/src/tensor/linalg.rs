// Copyright 2026 Dcube Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense linear-algebra backend: eigendecompositions and linear solves.
//!
//! Thin shim over `faer` so the rest of the crate only sees `ndarray` types.

use faer::linalg::solvers::Solve;
use faer::Mat;
use ndarray::Array2;

use crate::error::{CoreError, Result};
use crate::tensor::{CMat, C64};

fn to_faer(a: &CMat) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn from_faer(m: &Mat<C64>) -> CMat {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Solve `a x = b` for dense complex `a` via partial-pivot LU.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(CoreError::DimMismatch {
            what: "linear solve",
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    let lu = to_faer(a).partial_piv_lu();
    let x = lu.solve(&to_faer(b));
    let out = from_faer(&x);
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(CoreError::Numerical {
            what: "linear solve",
            diagnostic: "non-finite entries in solution (singular system?)".into(),
        });
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matrix whose columns are
/// the corresponding orthonormal eigenvectors.
pub fn eigh(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let evd = to_faer(a)
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| CoreError::Numerical {
            what: "hermitian eigendecomposition",
            diagnostic: format!("{e:?}"),
        })?;
    let n = a.nrows();
    let s = evd.S();
    let vals: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let vecs = Array2::from_shape_fn((n, n), |(i, j)| evd.U()[(i, j)]);
    Ok((vals, vecs))
}

/// Eigenvalues of a general (non-Hermitian) complex matrix.
pub fn eigvals(a: &CMat) -> Result<Vec<C64>> {
    to_faer(a).eigenvalues().map_err(|e| CoreError::Numerical {
        what: "general eigenvalues",
        diagnostic: format!("{e:?}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn eigh_recovers_known_spectrum() {
        // Pauli X has eigenvalues -1, +1.
        let x = array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let (vals, vecs) = eigh(&x).unwrap();
        assert_abs_diff_eq!(vals[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-12);
        // Reconstruct X from the decomposition.
        let mut recon = CMat::zeros((2, 2));
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    recon[[i, j]] += vecs[[i, k]] * vals[k] * vecs[[j, k]].conj();
                }
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(recon[[i, j]].re, x[[i, j]].re, epsilon = 1e-12);
                assert_abs_diff_eq!(recon[[i, j]].im, x[[i, j]].im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn solve_identity_rhs_is_inverse() {
        let a = array![
            [C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
            [C64::new(0.0, -1.0), C64::new(3.0, 0.0)]
        ];
        let id = CMat::eye(2);
        let x = solve(&a, &id).unwrap();
        let prod = a.dot(&x);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(prod[[i, j]].re, want, epsilon = 1e-12);
                assert_abs_diff_eq!(prod[[i, j]].im, 0.0, epsilon = 1e-12);
            }
        }
    }
}
