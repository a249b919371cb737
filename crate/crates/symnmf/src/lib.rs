//! Symmetric nonnegative matrix factorization toolkit.
//!
//! Approximates a symmetric nonnegative matrix `A` by `W W^T` with `W >= 0`,
//! working through the penalized nonsymmetric surrogate
//! `1/2 (|A - W H^T|_F^2 + alpha |W - H|_F^2)` whose penalty weight is tuned
//! adaptively as the iteration proceeds. The alternating scheme reduces each
//! half-step to a nonnegative least squares problem, solved by either block
//! principal pivoting ([`bpp`]) or greedy coordinate descent ([`gcd`]).
//!
//! [`similarity`] builds the experiment matrices (random low-rank, cosine,
//! Gaussian kernel with normalized cut), [`bench`] runs multi-start
//! experiments, and the `symnmf` binary exposes both from the command line.

pub mod anls;
pub mod bench;
pub mod bpp;
pub mod chol;
pub mod csvio;
pub mod error;
pub mod gcd;
pub mod inner;
pub mod matrix;
pub mod metrics;
pub mod mtx;
pub mod rng;
pub mod scalar;
pub mod similarity;
pub mod subproblem;
pub mod sym;

pub use error::{Error, Result};
pub use matrix::{matmul, matmul_t, DenseMatrix};
pub use scalar::Scalar;
pub use subproblem::{build_subproblem, NnlsSubproblem};

pub use bpp::{bpp_solve_column, bpp_solve_matrix, BppConfig};
pub use gcd::{gcd_solve_matrix, GcdConfig, GcdOutcome};
pub use inner::InnerSolver;
pub use metrics::{degree_of_symmetry, relative_nonsym_error, relative_sym_error};
pub use sym::{
    initial_factors, sym_anls, BetaUpdate, IterationTrace, RunStatus, SymConfig, SymOutcome,
};

/// Double-precision matrix, the default throughout the CLI.
pub type Matrix64 = DenseMatrix<f64>;
/// Single-precision matrix.
pub type Matrix32 = DenseMatrix<f32>;
