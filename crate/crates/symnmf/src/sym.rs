//! The penalized symmetric solver: alternating nonnegative least squares on
//! the stacked problem with an adaptively (or geometrically) tuned penalty.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::InnerSolver;
use crate::matrix::{matmul, matmul_t, DenseMatrix};
use crate::metrics::degree_of_symmetry;
use crate::rng::PortableUniform;
use crate::scalar::Scalar;
use crate::subproblem::NnlsSubproblem;

/// Penalty bookkeeping for one outer iteration.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyState<T> {
    pub beta: T,
    pub alpha: T,
    pub eps_s: T,
    pub eps_n: T,
    pub delta: T,
    pub rho: T,
}

/// How `beta` evolves between outer iterations.
#[derive(Debug, Clone, Copy)]
pub enum BetaUpdate<T> {
    Ada,
    Geometric { zeta: T },
}

#[derive(Debug, Clone, Copy)]
pub struct SymConfig<T> {
    pub k: usize,
    /// Relative stall tolerance on eps_S.
    pub tau1: T,
    /// Symmetry tolerance on delta.
    pub tau2: T,
    pub nu_max: usize,
    pub inner: InnerSolver<T>,
    pub update: BetaUpdate<T>,
    pub seed: u64,
}

impl<T: Scalar> SymConfig<T> {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            tau1: T::from_f64_const(1e-3),
            tau2: T::from_f64_const(0.1),
            nu_max: 500,
            inner: InnerSolver::gcd(T::from_f64_const(1e-3)),
            update: BetaUpdate::Ada,
            seed: 0,
        }
    }
}

/// One outer-iteration record. Metrics are stored as `f64` for serialization
/// regardless of the working scalar type.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct IterationTrace {
    pub nu: usize,
    pub beta: f64,
    pub alpha: f64,
    pub eps_s: f64,
    pub eps_n: f64,
    pub delta: f64,
    pub rho: f64,
    pub corrections: u64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Converged,
    IterationCap,
}

#[derive(Debug, Clone)]
pub struct SymOutcome<T> {
    pub w: DenseMatrix<T>,
    pub h: DenseMatrix<T>,
    pub trace: Vec<IterationTrace>,
    pub status: RunStatus,
}

impl<T: Scalar> SymOutcome<T> {
    pub fn final_eps_s(&self) -> f64 {
        self.trace.last().map(|r| r.eps_s).unwrap_or(f64::NAN)
    }

    pub fn nu_tot(&self) -> usize {
        self.trace.len()
    }

    pub fn total_corrections(&self) -> u64 {
        self.trace.iter().map(|r| r.corrections).sum()
    }
}

/// Implicit Gram form of the stacked penalized subproblem: for factor `F`
/// and penalty `alpha`, `gram = F^T F + alpha I`, `cross = F^T A + alpha F^T`.
/// The four block matrices are never formed.
pub fn penalized_subproblem<T: Scalar>(
    a: &DenseMatrix<T>,
    f: &DenseMatrix<T>,
    alpha: T,
) -> Result<NnlsSubproblem<T>> {
    if f.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "penalized_subproblem",
            expected: (a.rows(), f.cols()),
            found: (f.rows(), f.cols()),
        });
    }
    let n = a.rows();
    let k = f.cols();
    let mut gram = matmul_t(f, f)?;
    for i in 0..k {
        let v = gram.get(i, i) + alpha;
        gram.set(i, i, v);
    }
    let mut cross = matmul_t(f, a)?;
    for j in 0..n {
        let col = cross.col_mut(j);
        for (i, ci) in col.iter_mut().enumerate() {
            *ci += alpha * f.get(j, i);
        }
    }
    NnlsSubproblem::from_parts(gram, cross)
}

/// The adaptive beta rule; first matching branch applies.
pub fn ada_update<T: Scalar>(beta: T, rho: T, delta: T) -> T {
    let one = T::one();
    let two = T::from_f64_const(2.0);
    let four = T::from_f64_const(4.0);
    let eight = T::from_f64_const(8.0);
    if rho < one && beta > eight && (delta < T::from_f64_const(0.01) || rho < T::from_f64_const(0.8)) {
        beta / eight
    } else if rho < one && beta > four && (delta < T::from_f64_const(0.1) || rho < T::from_f64_const(0.9)) {
        beta / four
    } else if rho < one && beta > two {
        beta / two
    } else {
        beta * eight.min(rho * rho)
    }
}

/// Geometric beta progression with fixed ratio `zeta`.
pub fn geometric_update<T: Scalar>(beta: T, zeta: T) -> T {
    beta * zeta
}

/// Start factors: `W0 = R sqrt(||A||_F) / ||R||_F` with `R` uniform in
/// [0,1], `H0 = 0`.
pub fn initial_factors<T: Scalar>(
    a: &DenseMatrix<T>,
    k: usize,
    seed: u64,
) -> (DenseMatrix<T>, DenseMatrix<T>) {
    let n = a.rows();
    let mut rng = PortableUniform::new(seed);
    let r = DenseMatrix::from_fn(n, k, |_, _| rng.next_scalar::<T>());
    let scale = a.frobenius_norm().sqrt() / r.frobenius_norm();
    (r.scale(scale), DenseMatrix::zeros(n, k))
}

/// The stopping predicate from the outer loop: eps_S stalled and factors
/// sufficiently symmetric.
pub fn stop_met<T: Scalar>(eps_s: T, eps_s_prev: T, delta: T, tau1: T, tau2: T) -> bool {
    (eps_s - eps_s_prev).abs() <= tau1 * eps_s && delta <= tau2
}

/// eps_S and eps_N computed through one shared `G = A W` product:
/// `||A - W H^T||^2 = ||A||^2 - 2 <G,H> + <W^T W, H^T H>` for symmetric `A`.
fn sym_metrics<T: Scalar>(
    a: &DenseMatrix<T>,
    norm_a2: T,
    w: &DenseMatrix<T>,
    h: &DenseMatrix<T>,
) -> Result<(T, T)> {
    let g = matmul(a, w)?;
    let wtw = matmul_t(w, w)?;
    let hth = matmul_t(h, h)?;
    let dot = |x: &DenseMatrix<T>, y: &DenseMatrix<T>| -> T {
        x.as_slice()
            .iter()
            .zip(y.as_slice())
            .map(|(&u, &v)| u * v)
            .sum()
    };
    let norm_a = norm_a2.sqrt();
    let two = T::from_f64_const(2.0);
    let res_s = (norm_a2 - two * dot(&g, w) + dot(&wtw, &wtw)).max(T::zero());
    let res_n = (norm_a2 - two * dot(&g, h) + dot(&wtw, &hth)).max(T::zero());
    Ok((res_s.sqrt() / norm_a, res_n.sqrt() / norm_a))
}

fn validate_input<T: Scalar>(a: &DenseMatrix<T>) -> Result<()> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch {
            context: "sym_anls input must be square",
            expected: (a.rows(), a.rows()),
            found: (a.rows(), a.cols()),
        });
    }
    a.check_nonnegative()?;
    if a.is_zero() {
        return Err(Error::ZeroMatrix("sym_anls input"));
    }
    if !a.is_symmetric(T::from_f64_const(1e-10)) {
        return Err(Error::Asymmetric);
    }
    Ok(())
}

/// Outer solver for `min_{W>=0} 1/2 ||A - W W^T||_F^2`.
///
/// Follows the alternating scheme literally: the penalty used in iteration
/// `nu` is the beta set before the loop-top update, `alpha = beta * max A`;
/// the stopping test runs before the beta update each iteration.
pub fn sym_anls<T: Scalar>(a: &DenseMatrix<T>, cfg: &SymConfig<T>) -> Result<SymOutcome<T>> {
    validate_input(a)?;
    let n = a.rows();
    if cfg.k == 0 || cfg.k >= n {
        return Err(Error::InvalidParameter(format!(
            "rank k={} must satisfy 0 < k < n={n}",
            cfg.k
        )));
    }
    let (w0, h0) = initial_factors(a, cfg.k, cfg.seed);
    sym_anls_from(a, cfg, w0, h0)
}

/// Same as [`sym_anls`] with caller-supplied start factors.
pub fn sym_anls_from<T: Scalar>(
    a: &DenseMatrix<T>,
    cfg: &SymConfig<T>,
    w0: DenseMatrix<T>,
    h0: DenseMatrix<T>,
) -> Result<SymOutcome<T>> {
    let max_a = a.max_entry();
    let norm_a2 = {
        let f = a.frobenius_norm();
        f * f
    };
    let mut w = w0;
    let mut h = h0;
    let mut inner = cfg.inner;
    let mut beta = T::one();
    let (mut eps_s_prev, _) = sym_metrics(a, norm_a2, &w, &w)?;
    let mut trace: Vec<IterationTrace> = Vec::new();
    let mut nu = 0usize;
    let mut stopped = false;
    while !stopped && nu < cfg.nu_max {
        let tick = Instant::now();
        let alpha = beta * max_a;
        nu += 1;
        let sub_h = penalized_subproblem(a, &w, alpha)?;
        let (ht, cor_h) = inner.solve(&sub_h, &h.transpose())?;
        h = ht.transpose();
        let sub_w = penalized_subproblem(a, &h, alpha)?;
        let (wt, cor_w) = inner.solve(&sub_w, &w.transpose())?;
        w = wt.transpose();
        let (eps_s, eps_n) = sym_metrics(a, norm_a2, &w, &h)?;
        let delta = degree_of_symmetry(&w, &h)?;
        let rho = if eps_n > T::zero() {
            eps_s / eps_n
        } else {
            T::infinity()
        };
        stopped = stop_met(eps_s, eps_s_prev, delta, cfg.tau1, cfg.tau2);
        let beta_next = match cfg.update {
            BetaUpdate::Ada => ada_update(beta, rho, delta),
            BetaUpdate::Geometric { zeta } => geometric_update(beta, zeta),
        };
        trace.push(IterationTrace {
            nu,
            beta: beta.to_f64_lossy(),
            alpha: alpha.to_f64_lossy(),
            eps_s: eps_s.to_f64_lossy(),
            eps_n: eps_n.to_f64_lossy(),
            delta: delta.to_f64_lossy(),
            rho: rho.to_f64_lossy(),
            corrections: cor_h + cor_w,
            elapsed_s: tick.elapsed().as_secs_f64(),
        });
        beta = beta_next;
        eps_s_prev = eps_s;
        if nu == 1 {
            // The first iteration's subproblems are cold-start transients
            // whose scale can sit orders of magnitude above steady state;
            // drop any reference latched from them so the second iteration
            // sets the run scale the GCD stopping floor is measured against.
            inner.reset_reference();
        }
    }
    Ok(SymOutcome {
        w,
        h,
        trace,
        status: if stopped {
            RunStatus::Converged
        } else {
            RunStatus::IterationCap
        },
    })
}

pub const TRACE_CSV_HEADER: &str = "nu,beta,alpha,eps_S,eps_N,delta,rho,corrections,elapsed_s";

/// Serializes trace rows to the CSV layout consumed by the bench tooling and
/// the plotting scripts.
pub fn write_trace_csv<W: Write>(rows: &[IterationTrace], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.nu, r.beta, r.alpha, r.eps_s, r.eps_n, r.delta, r.rho, r.corrections, r.elapsed_s
        )?;
    }
    Ok(())
}

/// Per-iteration average correction count, `corrections / (2n)` — the
/// derived column used for correction-rate plots.
pub fn cor_av(row: &IterationTrace, n: usize) -> f64 {
    row.corrections as f64 / (2.0 * n as f64)
}
