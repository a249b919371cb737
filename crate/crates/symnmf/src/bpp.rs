//! Exact NNLS by block principal pivoting.
//!
//! Per column of the right-hand side, index sets are predicted and exchanged
//! in blocks; a single-index backup rule guarantees finite termination. The
//! restricted systems are gathered from the precomputed `Q = C^T C` and
//! `P = C^T B`, never recomputed from `C`.

use std::collections::BTreeMap;

use crate::chol::Cholesky;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::subproblem::NnlsSubproblem;

/// Feasibility tolerance for the KKT test.
pub const KKT_FEAS_TOL: f64 = 1e-12;

/// Active/passive split of `{0..k-1}` for one column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPartition {
    passive: Vec<bool>,
}

impl IndexPartition {
    /// Zero entries of the start vector go active, positives passive.
    pub fn from_start<T: Scalar>(x0: &[T]) -> Self {
        Self {
            passive: x0.iter().map(|&v| v > T::zero()).collect(),
        }
    }

    pub fn all_active(k: usize) -> Self {
        Self {
            passive: vec![false; k],
        }
    }

    pub fn k(&self) -> usize {
        self.passive.len()
    }

    pub fn is_passive(&self, i: usize) -> bool {
        self.passive[i]
    }

    pub fn passive_indices(&self) -> Vec<usize> {
        (0..self.k()).filter(|&i| self.passive[i]).collect()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.k()).filter(|&i| !self.passive[i]).collect()
    }

    fn flip(&mut self, i: usize) {
        self.passive[i] = !self.passive[i];
    }
}

/// Pivoting safeguards.
#[derive(Debug, Clone, Copy)]
pub struct BppConfig {
    /// Consecutive full exchanges without a strict decrease in the violation
    /// count before the backup rule engages.
    pub max_block_failures: usize,
    /// Per-column iteration cap; `None` resolves to `5 * k` at solve time.
    pub max_iterations: Option<usize>,
}

impl Default for BppConfig {
    fn default() -> Self {
        Self {
            max_block_failures: 3,
            max_iterations: None,
        }
    }
}

impl BppConfig {
    fn cap(&self, k: usize) -> usize {
        self.max_iterations.unwrap_or(5 * k)
    }
}

/// Work counters surfaced to the bench module.
#[derive(Debug, Clone, Copy, Default)]
pub struct BppStats {
    pub cholesky_count: u64,
    /// Total indices moved between the active and passive sets.
    pub exchange_count: u64,
    /// Times a column switched to the single-index backup rule.
    pub backup_activations: u64,
    pub sweeps: u64,
}

/// Outcome of the KKT test with the violating index sets (original indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KktCheck {
    pub satisfied: bool,
    pub passive_violations: Vec<usize>,
    pub active_violations: Vec<usize>,
}

/// KKT test: passive values and active gradients both nonnegative to `tol`.
///
/// `x_p` / `g_a` are the passive solution and restricted gradient; the index
/// slices give their original positions in `{0..k-1}`.
pub fn kkt_satisfied<T: Scalar>(
    x_p: &[T],
    passive_idx: &[usize],
    g_a: &[T],
    active_idx: &[usize],
) -> KktCheck {
    let tol = T::from_f64_const(KKT_FEAS_TOL);
    let passive_violations: Vec<usize> = x_p
        .iter()
        .zip(passive_idx)
        .filter(|(&v, _)| v < -tol)
        .map(|(_, &i)| i)
        .collect();
    let active_violations: Vec<usize> = g_a
        .iter()
        .zip(active_idx)
        .filter(|(&v, _)| v < -tol)
        .map(|(_, &i)| i)
        .collect();
    KktCheck {
        satisfied: passive_violations.is_empty() && active_violations.is_empty(),
        passive_violations,
        active_violations,
    }
}

/// Solves the unconstrained passive system `Q_PP z = P[passive, col]` by
/// Cholesky on the gathered restriction.
pub fn solve_passive<T: Scalar>(
    sub: &NnlsSubproblem<T>,
    col: usize,
    part: &IndexPartition,
) -> Result<Vec<T>> {
    let passive = part.passive_indices();
    let chol = factor_passive(sub, &passive)?;
    Ok(solve_with_factor(sub, col, &passive, &chol))
}

fn factor_passive<T: Scalar>(sub: &NnlsSubproblem<T>, passive: &[usize]) -> Result<Cholesky<T>> {
    let q = sub.gram();
    Cholesky::factor(passive.len(), |i, j| q.get(passive[i], passive[j]))
}

fn solve_with_factor<T: Scalar>(
    sub: &NnlsSubproblem<T>,
    col: usize,
    passive: &[usize],
    chol: &Cholesky<T>,
) -> Vec<T> {
    let rhs = sub.rhs(col);
    let mut z: Vec<T> = passive.iter().map(|&i| rhs[i]).collect();
    chol.solve_in_place(&mut z);
    z
}

/// Restricted gradient on the active set: `g_A = Q[A,P] z - P[A, col]`.
fn active_gradient<T: Scalar>(
    sub: &NnlsSubproblem<T>,
    col: usize,
    passive: &[usize],
    active: &[usize],
    z: &[T],
) -> Vec<T> {
    let q = sub.gram();
    let rhs = sub.rhs(col);
    active
        .iter()
        .map(|&a| {
            let mut g = -rhs[a];
            for (&p, &zp) in passive.iter().zip(z) {
                g += q.get(a, p) * zp;
            }
            g
        })
        .collect()
}

/// Per-column pivoting state, shared by the scalar and matrix drivers.
struct ColumnState<T> {
    part: IndexPartition,
    z: Vec<T>,
    best_violations: usize,
    failures: usize,
    backup: bool,
    iterations: usize,
    done: bool,
}

impl<T: Scalar> ColumnState<T> {
    fn new(x0: &[T]) -> Self {
        Self {
            part: IndexPartition::from_start(x0),
            z: Vec::new(),
            best_violations: usize::MAX,
            failures: 0,
            backup: false,
            iterations: 0,
            done: false,
        }
    }

    /// One pivoting step given a freshly solved passive system.
    /// Returns the number of indices exchanged (0 when KKT holds).
    fn advance(
        &mut self,
        sub: &NnlsSubproblem<T>,
        col: usize,
        cfg: &BppConfig,
        stats: &mut BppStats,
    ) -> Result<usize> {
        let passive = self.part.passive_indices();
        let active = self.part.active_indices();
        let g_a = active_gradient(sub, col, &passive, &active, &self.z);
        let check = kkt_satisfied(&self.z, &passive, &g_a, &active);
        if check.satisfied {
            self.done = true;
            return Ok(0);
        }
        self.iterations += 1;
        if self.iterations > cfg.cap(sub.k()) {
            return Err(Error::IterationCap { column: Some(col) });
        }
        let nv = check.passive_violations.len() + check.active_violations.len();
        let moved;
        if self.backup {
            moved = self.exchange_single(&check);
        } else if nv < self.best_violations {
            self.best_violations = nv;
            self.failures = 0;
            moved = self.exchange_all(&check);
        } else if self.failures < cfg.max_block_failures {
            self.failures += 1;
            moved = self.exchange_all(&check);
        } else {
            // block exchange stalled; fall back to one-index moves for the
            // rest of this column
            self.backup = true;
            stats.backup_activations += 1;
            moved = self.exchange_single(&check);
        }
        stats.exchange_count += moved as u64;
        Ok(moved)
    }

    fn exchange_all(&mut self, check: &KktCheck) -> usize {
        for &i in check
            .passive_violations
            .iter()
            .chain(&check.active_violations)
        {
            self.part.flip(i);
        }
        check.passive_violations.len() + check.active_violations.len()
    }

    fn exchange_single(&mut self, check: &KktCheck) -> usize {
        let i = check
            .passive_violations
            .iter()
            .chain(&check.active_violations)
            .copied()
            .max()
            .expect("violations nonempty");
        self.part.flip(i);
        1
    }

    /// Final iterate: passive solution scattered over `{0..k-1}`, tiny
    /// negatives clamped.
    fn extract(&self, k: usize) -> Vec<T> {
        let mut x = vec![T::zero(); k];
        for (&i, &v) in self.part.passive_indices().iter().zip(&self.z) {
            x[i] = v.max(T::zero());
        }
        x
    }
}

/// Exact NNLS for one column of `B`.
pub fn bpp_solve_column<T: Scalar>(
    sub: &NnlsSubproblem<T>,
    col: usize,
    x0: &[T],
    cfg: &BppConfig,
) -> Result<Vec<T>> {
    let mut stats = BppStats::default();
    bpp_solve_column_with_stats(sub, col, x0, cfg, &mut stats)
}

fn bpp_solve_column_with_stats<T: Scalar>(
    sub: &NnlsSubproblem<T>,
    col: usize,
    x0: &[T],
    cfg: &BppConfig,
    stats: &mut BppStats,
) -> Result<Vec<T>> {
    let k = sub.k();
    debug_assert_eq!(x0.len(), k);
    let mut state = ColumnState::new(x0);
    loop {
        let passive = state.part.passive_indices();
        let chol = factor_passive(sub, &passive)
            .map_err(|e| Error::Column(col, Box::new(e)))?;
        stats.cholesky_count += 1;
        state.z = solve_with_factor(sub, col, &passive, &chol);
        state.advance(sub, col, cfg, stats)?;
        if state.done {
            return Ok(state.extract(k));
        }
    }
}

/// Exact NNLS for every column of `B`, grouping columns that share a passive
/// set so each group pays for one Cholesky factorization per sweep.
pub fn bpp_solve_matrix<T: Scalar>(
    sub: &NnlsSubproblem<T>,
    x0: &DenseMatrix<T>,
    cfg: &BppConfig,
) -> Result<(DenseMatrix<T>, BppStats)> {
    let k = sub.k();
    let s = sub.s();
    if x0.rows() != k || x0.cols() != s {
        return Err(Error::DimensionMismatch {
            context: "bpp_solve_matrix start iterate",
            expected: (k, s),
            found: (x0.rows(), x0.cols()),
        });
    }
    let mut stats = BppStats::default();
    let mut states: Vec<ColumnState<T>> =
        (0..s).map(|h| ColumnState::new(x0.col(h))).collect();
    let mut out = DenseMatrix::zeros(k, s);
    loop {
        // group unfinished columns by passive set
        let mut groups: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
        for (h, st) in states.iter().enumerate() {
            if !st.done {
                groups.entry(st.part.passive.clone()).or_default().push(h);
            }
        }
        if groups.is_empty() {
            break;
        }
        stats.sweeps += 1;
        for (mask, cols) in groups {
            let passive: Vec<usize> = (0..k).filter(|&i| mask[i]).collect();
            let chol = factor_passive(sub, &passive)
                .map_err(|e| Error::Column(cols[0], Box::new(e)))?;
            stats.cholesky_count += 1;
            for h in cols {
                states[h].z = solve_with_factor(sub, h, &passive, &chol);
                states[h].advance(sub, h, cfg, &mut stats)?;
                if states[h].done {
                    out.col_mut(h).copy_from_slice(&states[h].extract(k));
                }
            }
        }
    }
    Ok((out, stats))
}

/// Ungrouped reference path: solves each column independently. Kept public so
/// tests can check that grouping is a pure optimization.
pub fn bpp_solve_matrix_ungrouped<T: Scalar>(
    sub: &NnlsSubproblem<T>,
    x0: &DenseMatrix<T>,
    cfg: &BppConfig,
) -> Result<(DenseMatrix<T>, BppStats)> {
    let k = sub.k();
    let s = sub.s();
    let mut stats = BppStats::default();
    let mut out = DenseMatrix::zeros(k, s);
    for h in 0..s {
        let x = bpp_solve_column_with_stats(sub, h, x0.col(h), cfg, &mut stats)?;
        out.col_mut(h).copy_from_slice(&x);
    }
    Ok((out, stats))
}
