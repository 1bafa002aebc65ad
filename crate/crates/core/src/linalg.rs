//! Small dense symmetric-matrix helpers.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn is_symmetric(m: &DMatrix<f64>) -> bool {
    m.is_square() && (0..m.nrows()).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
}

/// Lower Cholesky factor, failing if `m` is not positive definite.
pub fn cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    nalgebra::Cholesky::new(m.clone())
        .map(|c| c.l())
        .ok_or_else(|| Error::SingularMatrix(format!("Cholesky failed for {m}")))
}

/// Solves `L y = x` for lower-triangular `L`.
pub fn lower_solve(l: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Inverse of an SPD matrix from its lower Cholesky factor.
pub fn inverse_from_cholesky(l: &DMatrix<f64>) -> DMatrix<f64> {
    let n = l.nrows();
    let mut inv = DMatrix::zeros(n, n);
    for c in 0..n {
        let mut e = vec![0.0; n];
        e[c] = 1.0;
        let y = lower_solve(l, &e);
        // back substitution with Lᵀ
        let mut z = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[(k, i)] * z[k];
            }
            z[i] = s / l[(i, i)];
        }
        for r in 0..n {
            inv[(r, c)] = z[r];
        }
    }
    symmetrize(&inv)
}

/// Symmetric square root and inverse square root via eigendecomposition.
pub fn sqrt_pair(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = nalgebra::SymmetricEigen::new(symmetrize(m));
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::SingularMatrix(format!("eigenvalues {}", eig.eigenvalues)));
    }
    let q = &eig.eigenvectors;
    let root = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|l| l.sqrt()));
    let s = q * DMatrix::from_diagonal(&root) * q.transpose();
    let si = q * DMatrix::from_diagonal(&root.map(|r| 1.0 / r)) * q.transpose();
    Ok((symmetrize(&s), symmetrize(&si)))
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn spectrum_bounds(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = nalgebra::SymmetricEigen::new(symmetrize(m));
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

pub fn quad_form(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += m[(i, j)] * x[i] * x[j];
        }
    }
    s
}

pub fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|i| (0..x.len()).map(|j| m[(i, j)] * x[j]).sum()).collect()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_inverse_roundtrip() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let l = cholesky(&m).unwrap();
        let inv = inverse_from_cholesky(&l);
        let id = &m * &inv;
        assert!(max_abs_diff(&id, &DMatrix::identity(3, 3)) < 1e-14);
    }

    #[test]
    fn sqrt_pair_is_consistent() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.7, 0.7, 1.0]);
        let (s, si) = sqrt_pair(&m).unwrap();
        assert!(max_abs_diff(&(&s * &s), &m) < 1e-14);
        assert!(max_abs_diff(&(&s * &si), &DMatrix::identity(2, 2)) < 1e-14);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky(&m).is_err());
        assert!(sqrt_pair(&m).is_err());
    }
}
