//! Relative residuals and the degree-of-symmetry measure used by the outer
//! stopping and penalty logic.

use crate::error::{Error, Result};
use crate::matrix::{matmul, DenseMatrix};
use crate::scalar::Scalar;

/// `eps_N = ||A - W H^T||_F / ||A||_F`.
pub fn relative_nonsym_error<T: Scalar>(
    a: &DenseMatrix<T>,
    w: &DenseMatrix<T>,
    h: &DenseMatrix<T>,
) -> Result<T> {
    if w.rows() != a.rows() || h.rows() != a.cols() || w.cols() != h.cols() {
        return Err(Error::DimensionMismatch {
            context: "relative_nonsym_error",
            expected: (a.rows(), a.cols()),
            found: (w.rows(), h.rows()),
        });
    }
    let norm_a = a.frobenius_norm();
    if norm_a == T::zero() {
        return Err(Error::ZeroMatrix("relative error denominator"));
    }
    let wht = matmul(w, &h.transpose())?;
    Ok(a.sub(&wht)?.frobenius_norm() / norm_a)
}

/// `eps_S = ||A - W W^T||_F / ||A||_F`; same code path as the nonsymmetric
/// error with `H = W`.
pub fn relative_sym_error<T: Scalar>(a: &DenseMatrix<T>, w: &DenseMatrix<T>) -> Result<T> {
    relative_nonsym_error(a, w, w)
}

/// `delta = ||W - H||_F / min(||W||_F, ||H||_F)`.
///
/// Degenerate denominators: both factors zero counts as trivially symmetric
/// (0); exactly one zero yields an infinite sentinel so the outer stopping
/// test cannot fire on it.
pub fn degree_of_symmetry<T: Scalar>(w: &DenseMatrix<T>, h: &DenseMatrix<T>) -> Result<T> {
    if w.rows() != h.rows() || w.cols() != h.cols() {
        return Err(Error::DimensionMismatch {
            context: "degree_of_symmetry",
            expected: (w.rows(), w.cols()),
            found: (h.rows(), h.cols()),
        });
    }
    let nw = w.frobenius_norm();
    let nh = h.frobenius_norm();
    let denom = nw.min(nh);
    if denom == T::zero() {
        return Ok(if nw == nh { T::zero() } else { T::infinity() });
    }
    Ok(w.sub(h)?.frobenius_norm() / denom)
}
