//! Small dense Cholesky for the passive-set systems.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor of a small SPD matrix.
///
/// Breakdown (a pivot at or below the round-off floor) is reported as a
/// rank-deficiency error; that is the crate's detection point for
/// rank-deficient iterates.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    // column-major lower triangle, full n*n with upper part unused
    l: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors a full matrix given as `DenseMatrix`.
    pub fn factor_full(m: &DenseMatrix<T>) -> Result<Self> {
        let n = m.rows();
        Self::factor(n, |i, j| m.get(i, j))
    }

    /// Factors the SPD matrix `a(i,j)` of order `n`.
    pub fn factor(n: usize, a: impl Fn(usize, usize) -> T) -> Result<Self> {
        let mut l = vec![T::zero(); n * n];
        let mut max_diag = T::zero();
        for i in 0..n {
            max_diag = max_diag.max(a(i, i).abs());
        }
        let floor = T::from_f64_const(1e-13) * max_diag;
        for j in 0..n {
            let mut d = a(j, j);
            for p in 0..j {
                let v = l[p * n + j];
                d -= v * v;
            }
            if d <= floor {
                return Err(Error::RankDeficient(format!(
                    "Cholesky pivot {d} at index {j}"
                )));
            }
            let dj = d.sqrt();
            l[j * n + j] = dj;
            for i in (j + 1)..n {
                let mut s = a(i, j);
                for p in 0..j {
                    s -= l[p * n + i] * l[p * n + j];
                }
                l[j * n + i] = s / dj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// Solves `L L^T x = b` in place.
    pub fn solve_in_place(&self, b: &mut [T]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        // forward
        for j in 0..n {
            let x = b[j] / self.l[j * n + j];
            b[j] = x;
            for i in (j + 1)..n {
                b[i] = b[i] - self.l[j * n + i] * x;
            }
        }
        // backward
        for j in (0..n).rev() {
            let mut s = b[j];
            for i in (j + 1)..n {
                s -= self.l[j * n + i] * b[i];
            }
            b[j] = s / self.l[j * n + j];
        }
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
