//! General (nonsymmetric) alternating nonnegative least squares for
//! `min_{W,H>=0} 1/2 ||M - W H^T||_F^2`.

use crate::error::{Error, Result};
use crate::inner::InnerSolver;
use crate::matrix::{matmul, DenseMatrix};
use crate::scalar::Scalar;
use crate::subproblem::build_subproblem;
use crate::sym::RunStatus;

#[derive(Debug, Clone, Copy)]
pub struct AnlsOptions<T> {
    /// Relative stall tolerance on the squared error e.
    pub stall_tol: T,
    pub max_outer: usize,
}

impl<T: Scalar> Default for AnlsOptions<T> {
    fn default() -> Self {
        Self {
            stall_tol: T::from_f64_const(1e-4),
            max_outer: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnlsOutcome<T> {
    pub w: DenseMatrix<T>,
    pub h: DenseMatrix<T>,
    /// `e_nu = ||M - W H^T||_F^2` per outer iteration.
    pub errors: Vec<T>,
    pub status: RunStatus,
}

/// Alternates exact/approximate NNLS solves for H (on `M`) and W (on `M^T`).
///
/// A factor that collapses to zero ends the run: the best rank-k iterate is
/// then the zero factorization and no further subproblem is well posed.
pub fn anls_nmf<T: Scalar>(
    m: &DenseMatrix<T>,
    k: usize,
    inner: &InnerSolver<T>,
    w0: DenseMatrix<T>,
    opts: &AnlsOptions<T>,
) -> Result<AnlsOutcome<T>> {
    m.check_nonnegative()?;
    if w0.rows() != m.rows() || w0.cols() != k {
        return Err(Error::DimensionMismatch {
            context: "anls_nmf start factor",
            expected: (m.rows(), k),
            found: (w0.rows(), w0.cols()),
        });
    }
    w0.check_nonnegative()?;
    let (rows, cols) = (m.rows(), m.cols());
    let mt = m.transpose();
    let mut inner = *inner;
    let mut w = w0;
    let mut h = DenseMatrix::<T>::zeros(cols, k);
    let mut errors = Vec::new();
    let mut e_prev = {
        let f = m.frobenius_norm();
        f * f
    };
    let mut status = RunStatus::IterationCap;
    for _ in 0..opts.max_outer {
        let sub_h = build_subproblem(&w, m)?;
        let (ht, _) = inner.solve(&sub_h, &h.transpose())?;
        h = ht.transpose();
        if h.is_zero() {
            w = DenseMatrix::zeros(rows, k);
            let e = residual_sq(m, &w, &h)?;
            errors.push(e);
            status = RunStatus::Converged;
            break;
        }
        let sub_w = build_subproblem(&h, &mt)?;
        let (wt, _) = inner.solve(&sub_w, &w.transpose())?;
        w = wt.transpose();
        let e = residual_sq(m, &w, &h)?;
        errors.push(e);
        if (e - e_prev).abs() <= opts.stall_tol * e || e == T::zero() {
            status = RunStatus::Converged;
            break;
        }
        e_prev = e;
    }
    Ok(AnlsOutcome {
        w,
        h,
        errors,
        status,
    })
}

fn residual_sq<T: Scalar>(
    m: &DenseMatrix<T>,
    w: &DenseMatrix<T>,
    h: &DenseMatrix<T>,
) -> Result<T> {
    let wht = matmul(w, &h.transpose())?;
    let r = m.sub(&wht)?.frobenius_norm();
    Ok(r * r)
}
