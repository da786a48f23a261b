//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub fn cholesky(a: &Matrix, what: &str) -> Result<Cholesky<f64, Dyn>> {
    a.clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical(format!("{what} is not positive definite")))
}

/// `log det A` for symmetric positive-definite `A`.
pub fn logdet_pd(a: &Matrix, what: &str) -> Result<f64> {
    let chol = cholesky(a, what)?;
    Ok(logdet_from_cholesky(&chol))
}

pub fn logdet_from_cholesky(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

/// Inverse of a symmetric positive-definite matrix, symmetrized.
pub fn inverse_pd(a: &Matrix, what: &str) -> Result<Matrix> {
    let inv = cholesky(a, what)?.inverse();
    Ok(symmetrize(&inv))
}

pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

/// `tr(A B)` for square matrices of equal size, without forming the product.
pub fn trace_product(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.transpose().iter()).map(|(x, y)| x * y).sum()
}

pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn is_symmetric(a: &Matrix, tol: f64) -> bool {
    a.is_square()
        && (0..a.nrows())
            .all(|i| (0..i).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= tol * (1.0 + a[(i, j)].abs())))
}
