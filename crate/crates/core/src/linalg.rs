//! Small dense helpers for symmetric positive definite matrices.
//!
//! Determinants and inverses always go through a Cholesky factorization.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Componentwise symmetry tolerance for matrices accepted as SPD.
pub const SYMMETRY_TOL: f64 = 1e-12;

pub fn is_symmetric(m: &Matrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = 1.0 + m[(i, j)].abs().max(m[(j, i)].abs());
            if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

pub fn cholesky(m: &Matrix) -> Result<Cholesky<f64, Dyn>> {
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::NotSpd);
    }
    Cholesky::new(m.clone()).ok_or(Error::NotSpd)
}

/// `log det m` for an SPD matrix.
pub fn log_det_spd(m: &Matrix) -> Result<f64> {
    let chol = cholesky(m)?;
    Ok(log_det_from_cholesky(&chol))
}

pub fn log_det_from_cholesky(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
}

pub fn det_spd(m: &Matrix) -> Result<f64> {
    log_det_spd(m).map(f64::exp)
}

pub fn inverse_spd(m: &Matrix) -> Result<Matrix> {
    let inv = cholesky(m)?.inverse();
    Ok(symmetrize(&inv))
}

/// Lower Cholesky factor `L` with `m = L Lᵀ`.
pub fn cholesky_factor(m: &Matrix) -> Result<Matrix> {
    Ok(cholesky(m)?.l())
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Validates that `m` is square, symmetric and positive definite.
pub fn check_spd(m: &Matrix) -> Result<()> {
    if !is_symmetric(m, SYMMETRY_TOL) {
        return Err(Error::NotSpd);
    }
    cholesky(m).map(|_| ())
}

/// Determinant of a general square matrix via LU; used only for unimodularity gates.
pub fn det_general(m: &Matrix) -> f64 {
    m.clone().lu().determinant()
}

pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("matrix must be square and non-empty".into()));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}
