//! Common interface over the two inner NNLS solvers.

use crate::bpp::{bpp_solve_matrix, BppConfig};
use crate::error::Result;
use crate::gcd::{gcd_solve_matrix, GcdConfig};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::subproblem::NnlsSubproblem;

#[derive(Debug, Clone, Copy)]
pub enum InnerSolver<T> {
    Bpp(BppConfig),
    Gcd(GcdConfig<T>),
}

impl<T: Scalar> InnerSolver<T> {
    pub fn bpp() -> Self {
        Self::Bpp(BppConfig::default())
    }

    pub fn gcd(eta: T) -> Self {
        Self::Gcd(GcdConfig::with_eta(eta))
    }

    /// Solves `min_{X>=0} 1/2 ||B - C X||_F^2` from the warm start `x0`.
    /// The returned count is the work measure the traces carry: coordinate
    /// corrections for GCD, index exchanges for BPP.
    ///
    /// For GCD the first call starting from a nonzero iterate latches its
    /// own scale `mu` into `mu_reference`; every later call then stops
    /// against the combined threshold `eta * mu_call + run_floor * mu`.
    /// Callers that drive a multi-phase run (e.g. the penalized outer loop)
    /// can call [`reset_reference`](Self::reset_reference) once the
    /// transient of the cold start has passed, so the latched scale
    /// reflects steady-state subproblems rather than the first one.
    pub fn solve(
        &mut self,
        sub: &NnlsSubproblem<T>,
        x0: &DenseMatrix<T>,
    ) -> Result<(DenseMatrix<T>, u64)> {
        match self {
            Self::Bpp(cfg) => {
                let (x, stats) = bpp_solve_matrix(sub, x0, cfg)?;
                Ok((x, stats.exchange_count))
            }
            Self::Gcd(cfg) => {
                let out = gcd_solve_matrix(sub, x0, cfg)?;
                if cfg.mu_reference.is_none() && !x0.is_zero() {
                    cfg.mu_reference = Some(out.mu);
                }
                Ok((out.x, out.corrections))
            }
        }
    }

    /// Clears the latched GCD reference scale so the next warm call latches
    /// a fresh one. No effect for BPP.
    pub fn reset_reference(&mut self) {
        if let Self::Gcd(cfg) = self {
            cfg.mu_reference = None;
        }
    }
}
