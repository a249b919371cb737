//! Implicit normal-equation form of an NNLS block, shared by both inner
//! solvers.

use crate::error::{Error, Result};
use crate::matrix::{matmul_t, DenseMatrix};
use crate::scalar::Scalar;

/// `min_{X>=0} 1/2 ||B - C X||_F^2` held implicitly as `Q = C^T C` and
/// `P = C^T B`. Solvers never touch `C` or `B` again.
#[derive(Debug, Clone)]
pub struct NnlsSubproblem<T> {
    gram: DenseMatrix<T>,
    cross: DenseMatrix<T>,
}

impl<T: Scalar> NnlsSubproblem<T> {
    /// Assembles from precomputed pieces; `gram` is symmetrized exactly so
    /// downstream gather never sees round-off asymmetry.
    pub fn from_parts(mut gram: DenseMatrix<T>, cross: DenseMatrix<T>) -> Result<Self> {
        let k = gram.rows();
        if gram.cols() != k {
            return Err(Error::DimensionMismatch {
                context: "gram must be square",
                expected: (k, k),
                found: (gram.rows(), gram.cols()),
            });
        }
        if cross.rows() != k {
            return Err(Error::DimensionMismatch {
                context: "cross rows must match gram order",
                expected: (k, cross.cols()),
                found: (cross.rows(), cross.cols()),
            });
        }
        mirror_upper(&mut gram);
        Ok(Self { gram, cross })
    }

    /// Factor rank `k`.
    pub fn k(&self) -> usize {
        self.gram.rows()
    }

    /// Number of right-hand-side columns.
    pub fn s(&self) -> usize {
        self.cross.cols()
    }

    pub fn gram(&self) -> &DenseMatrix<T> {
        &self.gram
    }

    pub fn cross(&self) -> &DenseMatrix<T> {
        &self.cross
    }

    /// Column `h` of `C^T B`.
    pub fn rhs(&self, h: usize) -> &[T] {
        self.cross.col(h)
    }

    /// Diagonal of the gram matrix.
    pub fn gram_diag(&self) -> Vec<T> {
        (0..self.k()).map(|i| self.gram.get(i, i)).collect()
    }
}

/// Copies the upper triangle onto the lower one, making symmetry exact.
fn mirror_upper<T: Scalar>(m: &mut DenseMatrix<T>) {
    let n = m.rows();
    for j in 0..n {
        for i in 0..j {
            let v = m.get(i, j);
            m.set(j, i, v);
        }
    }
}

/// `Q = C^T C`, `P = C^T B`, computed once up front.
pub fn build_subproblem<T: Scalar>(
    c: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
) -> Result<NnlsSubproblem<T>> {
    if c.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            context: "build_subproblem row counts",
            expected: (c.rows(), c.cols()),
            found: (b.rows(), b.cols()),
        });
    }
    let gram = matmul_t(c, c)?;
    let cross = matmul_t(c, b)?;
    NnlsSubproblem::from_parts(gram, cross)
}
