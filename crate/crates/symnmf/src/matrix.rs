//! Dense column-major matrix storage and the scalar reductions built on it.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, ArrayViewMut2, ShapeBuilder};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense real matrix, column-major.
///
/// Carrier for every matrix in the toolkit: inputs `A`/`M`, factors `W`/`H`,
/// and the stacked-problem pieces `C`/`B`. Immutable by convention after
/// construction; solvers build new matrices rather than mutating shared ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    /// Builds from column-major entries. Rejects empty shapes and length
    /// mismatches.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::BadEntryCount {
                rows,
                cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be nonempty");
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Row-major convenience constructor, mostly for tests and literals.
    pub fn from_rows(rows: &[&[T]]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let r = rows.len();
        let c = rows[0].len();
        for row in rows {
            if row.len() != c {
                return Err(Error::BadEntryCount {
                    rows: r,
                    cols: c,
                    got: row.len(),
                });
            }
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[j * self.rows + i] = v;
    }

    /// Contiguous slice holding column `j`.
    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        ArrayView2::from_shape((self.rows, self.cols).f(), &self.data)
            .expect("shape consistent with storage")
    }

    pub fn view_mut(&mut self) -> ArrayViewMut2<'_, T> {
        ArrayViewMut2::from_shape((self.rows, self.cols).f(), &mut self.data)
            .expect("shape consistent with storage")
    }

    pub fn from_array(a: Array2<T>) -> Self {
        let (rows, cols) = a.dim();
        assert!(rows > 0 && cols > 0, "matrix must be nonempty");
        Self::from_fn(rows, cols, |i, j| a[(i, j)])
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= T::zero())
    }

    /// Errors with the first offending index when any entry is negative.
    pub fn check_nonnegative(&self) -> Result<()> {
        for j in 0..self.cols {
            for (i, &v) in self.col(j).iter().enumerate() {
                if v < T::zero() {
                    return Err(Error::NegativeEntry { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == T::zero())
    }

    /// Relative symmetry test: `||A - A^T||_F <= tol * ||A||_F`.
    pub fn is_symmetric(&self, rel_tol: T) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let mut diff2 = T::zero();
        for j in 0..self.cols {
            for i in 0..j {
                let d = self.get(i, j) - self.get(j, i);
                diff2 += d * d;
            }
        }
        diff2.sqrt() <= rel_tol * self.frobenius_norm()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn max_entry(&self) -> T {
        self.data
            .iter()
            .copied()
            .fold(T::neg_infinity(), |a, b| a.max(b))
    }

    /// `self - other`, same shape required.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix subtraction",
                expected: (self.rows, self.cols),
                found: (other.rows, other.cols),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * c).collect(),
        }
    }
}

/// `A * B` through the BLAS-like kernel; output stays column-major.
pub fn matmul<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch {
            context: "matmul",
            expected: (a.cols(), a.cols()),
            found: (b.rows(), b.cols()),
        });
    }
    let mut out = Array2::<T>::zeros((a.rows(), b.cols()).f());
    general_mat_mul(T::one(), &a.view(), &b.view(), T::zero(), &mut out);
    let (data, _) = out.into_raw_vec_and_offset();
    DenseMatrix::new(a.rows(), b.cols(), data)
}

/// `A^T * B` without materializing the transpose.
pub fn matmul_t<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            context: "matmul_t",
            expected: (a.rows(), a.rows()),
            found: (b.rows(), b.cols()),
        });
    }
    let mut out = Array2::<T>::zeros((a.cols(), b.cols()).f());
    general_mat_mul(T::one(), &a.view().t(), &b.view(), T::zero(), &mut out);
    let (data, _) = out.into_raw_vec_and_offset();
    DenseMatrix::new(a.cols(), b.cols(), data)
}

/// Frobenius norm, spec-level entry point.
pub fn frobenius_norm<T: Scalar>(m: &DenseMatrix<T>) -> T {
    m.frobenius_norm()
}

/// Maximum entry (`max A` in the penalty rule).
pub fn max_entry<T: Scalar>(m: &DenseMatrix<T>) -> T {
    m.max_entry()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{rand_matrix, Rng64};

    #[test]
    fn frobenius_examples() {
        let eye = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(frobenius_norm(&eye), 2.0_f64.sqrt());
        let z = DenseMatrix::<f64>::zeros(3, 3);
        assert_eq!(frobenius_norm(&z), 0.0);
        let m = DenseMatrix::from_rows(&[&[3.0, 4.0]]).unwrap();
        assert_eq!(frobenius_norm(&m), 5.0);
    }

    #[test]
    fn max_entry_examples() {
        let eye = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(max_entry(&eye), 1.0);
        let m = DenseMatrix::from_fn(3, 3, |_, _| -0.5);
        assert_eq!(max_entry(&m), -0.5);
    }

    #[test]
    fn norm_absolutely_homogeneous() {
        let mut rng = Rng64::new(7);
        for _ in 0..20 {
            let m: DenseMatrix<f64> = rand_matrix(&mut rng, 5, 4);
            let c = rng.uniform() * 10.0 - 5.0;
            let lhs = m.scale(c).frobenius_norm();
            let rhs = c.abs() * m.frobenius_norm();
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }
    }

    #[test]
    fn empty_and_bad_shapes_rejected() {
        assert!(DenseMatrix::<f64>::new(0, 3, vec![]).is_err());
        assert!(DenseMatrix::<f64>::new(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn matmul_against_triple_loop() {
        let mut rng = Rng64::new(11);
        let a: DenseMatrix<f64> = rand_matrix(&mut rng, 5, 3);
        let b: DenseMatrix<f64> = rand_matrix(&mut rng, 3, 4);
        let c = matmul(&a, &b).unwrap();
        for i in 0..5 {
            for j in 0..4 {
                let mut s = 0.0;
                for l in 0..3 {
                    s += a.get(i, l) * b.get(l, j);
                }
                assert!((c.get(i, j) - s).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn nonnegative_scan() {
        let mut m = DenseMatrix::<f64>::zeros(2, 2);
        assert!(m.check_nonnegative().is_ok());
        m.set(1, 0, -1e-9);
        match m.check_nonnegative() {
            Err(Error::NegativeEntry { row: 1, col: 0 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }
}
