//! Approximate NNLS by greedy coordinate descent.
//!
//! Per column the single coordinate with the largest objective decrease is
//! corrected until the expected decrease drops below `eta * mu`, where `mu`
//! is the largest first-iteration decrease over all columns of the call.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::subproblem::NnlsSubproblem;

/// Below this, `mu` is treated as zero: the start iterate is already
/// coordinate-wise optimal and no corrections are performed.
pub const MU_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct GcdConfig<T> {
    /// Stopping tolerance in (0,1); 1e-3 is the suggested default.
    pub eta: T,
    /// Per-column correction cap; `None` resolves to `100 * k`.
    pub max_corrections_per_column: Option<usize>,
    /// Run-level scale for the stopping test, latched by the outer solver
    /// at the first call that starts from a warm (nonzero) iterate. When
    /// set, the per-column threshold becomes
    /// `eta * mu_call + run_floor * mu_reference`: the second term is an
    /// absolute floor that stops the polishing of decreases too small to
    /// matter at the run's scale. `None` (direct calls) keeps the pure
    /// call-relative threshold `eta * mu_call`.
    pub mu_reference: Option<T>,
    /// Coefficient of the run-scale floor; 1e-4 by default.
    pub run_floor: T,
}

impl<T: Scalar> Default for GcdConfig<T> {
    fn default() -> Self {
        Self {
            eta: T::from_f64_const(1e-3),
            max_corrections_per_column: None,
            mu_reference: None,
            run_floor: T::from_f64_const(5e-4),
        }
    }
}

impl<T: Scalar> GcdConfig<T> {
    pub fn with_eta(eta: T) -> Self {
        Self {
            eta,
            ..Self::default()
        }
    }

    fn cap(&self, k: usize) -> usize {
        self.max_corrections_per_column.unwrap_or(100 * k)
    }
}

/// Per-column descent state with an incrementally maintained gradient.
#[derive(Debug, Clone)]
pub struct GcdColumnState<T> {
    pub x: Vec<T>,
    /// `g = Q x - P[:, col]`, kept in sync after every correction.
    pub g: Vec<T>,
    pub corrections: usize,
}

impl<T: Scalar> GcdColumnState<T> {
    /// Initializes from a start iterate, computing the gradient directly.
    pub fn init(sub: &NnlsSubproblem<T>, col: usize, x0: &[T]) -> Self {
        let k = sub.k();
        debug_assert_eq!(x0.len(), k);
        let q = sub.gram();
        let rhs = sub.rhs(col);
        let mut g = vec![T::zero(); k];
        for (j, &xj) in x0.iter().enumerate() {
            if xj != T::zero() {
                let qc = q.col(j);
                for t in 0..k {
                    g[t] += qc[t] * xj;
                }
            }
        }
        for t in 0..k {
            g[t] -= rhs[t];
        }
        Self {
            x: x0.to_vec(),
            g,
            corrections: 0,
        }
    }

    /// Applies the correction `(i, lambda)`: updates `x_i` (exact zero on the
    /// clamp branch) and the full gradient.
    pub fn apply(&mut self, q: &DenseMatrix<T>, i: usize, lambda: T) {
        let xi = self.x[i] + lambda;
        self.x[i] = if lambda == -self.x[i] { T::zero() } else { xi };
        let qc = q.col(i);
        for (gt, &qti) in self.g.iter_mut().zip(qc) {
            *gt += lambda * qti;
        }
        self.corrections += 1;
    }
}

/// Step and decrease for coordinate `i`:
/// `lambda = -g_i/q_ii` unless that would go infeasible, else `-x_i`;
/// `d = -g_i lambda - q_ii lambda^2 / 2`.
#[inline]
fn step_and_decrease<T: Scalar>(gi: T, qii: T, xi: T) -> (T, T) {
    let half = T::from_f64_const(0.5);
    let r = gi / qii;
    let lambda = if r <= xi { -r } else { -xi };
    let d = -gi * lambda - half * qii * lambda * lambda;
    (lambda, d)
}

/// Best single-coordinate correction: the index maximizing the decrease
/// `d_i`, ties broken by smallest index.
pub fn best_correction<T: Scalar>(
    state: &GcdColumnState<T>,
    diag: &[T],
) -> Result<(usize, T, T)> {
    let mut best: Option<(usize, T, T)> = None;
    for i in 0..state.x.len() {
        let qii = diag[i];
        if qii <= T::zero() {
            return Err(Error::RankDeficient(format!(
                "gram diagonal {qii} at index {i}"
            )));
        }
        let (lambda, d) = step_and_decrease(state.g[i], qii, state.x[i]);
        match best {
            Some((_, _, db)) if d <= db => {}
            _ => best = Some((i, lambda, d)),
        }
    }
    Ok(best.expect("k >= 1"))
}

/// `mu`: the largest possible first-iteration decrease over every column of
/// the call, i.e. the scale the stopping test `max_i d_i < eta * mu` uses.
pub fn compute_mu<T: Scalar>(sub: &NnlsSubproblem<T>, x0: &DenseMatrix<T>) -> Result<T> {
    let diag = sub.gram_diag();
    let mut mu = T::zero();
    for h in 0..sub.s() {
        let state = GcdColumnState::init(sub, h, x0.col(h));
        let (_, _, d) = best_correction(&state, &diag)?;
        mu = mu.max(d);
    }
    Ok(mu)
}

/// Result of a matrix-level GCD call.
#[derive(Debug, Clone)]
pub struct GcdOutcome<T> {
    pub x: DenseMatrix<T>,
    /// Total single-coordinate corrections (the paper's `cor` contribution).
    pub corrections: u64,
    /// Columns that hit the correction cap before their stopping test.
    pub capped_columns: Vec<usize>,
    /// The call's own first-iteration maximum decrease, whether or not a
    /// pinned `mu_reference` overrode it for the threshold.
    pub mu: T,
}

/// Runs greedy coordinate descent on every column of the subproblem.
pub fn gcd_solve_matrix<T: Scalar>(
    sub: &NnlsSubproblem<T>,
    x0: &DenseMatrix<T>,
    cfg: &GcdConfig<T>,
) -> Result<GcdOutcome<T>> {
    let k = sub.k();
    let s = sub.s();
    if x0.rows() != k || x0.cols() != s {
        return Err(Error::DimensionMismatch {
            context: "gcd_solve_matrix start iterate",
            expected: (k, s),
            found: (x0.rows(), x0.cols()),
        });
    }
    let diag = sub.gram_diag();
    let mu = compute_mu(sub, x0)?;
    let floor = match cfg.mu_reference {
        Some(reference) => cfg.run_floor * reference,
        None => T::zero(),
    };
    let threshold = cfg.eta * mu + floor;
    if mu <= T::from_f64_const(MU_FLOOR) || mu < threshold {
        return Ok(GcdOutcome {
            x: x0.clone(),
            corrections: 0,
            capped_columns: Vec::new(),
            mu,
        });
    }
    let cap = cfg.cap(k);
    let mut out = DenseMatrix::zeros(k, s);
    let mut total: u64 = 0;
    let mut capped = Vec::new();
    let q = sub.gram();
    for h in 0..s {
        let mut state = GcdColumnState::init(sub, h, x0.col(h));
        loop {
            let (i, lambda, d) = best_correction(&state, &diag)?;
            if d < threshold || d <= T::zero() {
                break;
            }
            if state.corrections >= cap {
                capped.push(h);
                break;
            }
            state.apply(q, i, lambda);
        }
        total += state.corrections as u64;
        out.col_mut(h).copy_from_slice(&state.x);
    }
    Ok(GcdOutcome {
        x: out,
        corrections: total,
        capped_columns: capped,
        mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpp::{bpp_solve_matrix, BppConfig};
    use crate::subproblem::{build_subproblem, NnlsSubproblem};
    use crate::test_util::{column_objective_implicit, rand_matrix, rand_spd, Rng64};

    fn eye(n: usize) -> DenseMatrix<f64> {
        DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    fn state_from(x: &[f64], g: &[f64]) -> GcdColumnState<f64> {
        GcdColumnState {
            x: x.to_vec(),
            g: g.to_vec(),
            corrections: 0,
        }
    }

    #[test]
    fn best_correction_hand_cases() {
        // Q = I2, x = 0, g = (-3,-1): update coord 0 with step 3, decrease 4.5
        let st = state_from(&[0.0, 0.0], &[-3.0, -1.0]);
        let (i, lam, d) = best_correction(&st, &[1.0, 1.0]).unwrap();
        assert_eq!((i, lam, d), (0, 3.0, 4.5));

        // clamp branch: Q = I2, x = (1,0), g = (2,0)
        let st = state_from(&[1.0, 0.0], &[2.0, 0.0]);
        let (i, lam, d) = best_correction(&st, &[1.0, 1.0]).unwrap();
        assert_eq!((i, lam, d), (0, -1.0, 1.5));
    }

    #[test]
    fn best_correction_matches_objective_differencing() {
        let mut rng = Rng64::new(73);
        for _ in 0..20 {
            let q: DenseMatrix<f64> = rand_spd(&mut rng, 4);
            let rhs: Vec<f64> = (0..4).map(|_| rng.uniform() - 0.5).collect();
            let cross = DenseMatrix::new(4, 1, rhs.clone()).unwrap();
            let sub = NnlsSubproblem::from_parts(q.clone(), cross).unwrap();
            let x: Vec<f64> = (0..4).map(|_| rng.uniform()).collect();
            let st = GcdColumnState::init(&sub, 0, &x);
            let diag = sub.gram_diag();
            let (i_got, _, d_got) = best_correction(&st, &diag).unwrap();
            // evaluate all k candidates by direct objective differencing
            let f0 = column_objective_implicit(&q, &rhs, &x);
            let mut best = (0usize, f64::NEG_INFINITY);
            for i in 0..4 {
                let r = st.g[i] / q.get(i, i);
                let lam = if r <= x[i] { -r } else { -x[i] };
                let mut xt = x.clone();
                xt[i] += lam;
                let d = f0 - column_objective_implicit(&q, &rhs, &xt);
                if d > best.1 {
                    best = (i, d);
                }
            }
            assert_eq!(i_got, best.0);
            assert!((d_got - best.1).abs() <= 1e-10 * (1.0 + best.1.abs()));
        }
    }

    #[test]
    fn rank_deficient_diag_errors() {
        let q = DenseMatrix::from_rows(&[&[0.0, 0.0], &[0.0, 1.0]]).unwrap();
        let cross = DenseMatrix::from_rows(&[&[1.0], &[1.0]]).unwrap();
        let sub = NnlsSubproblem::from_parts(q, cross).unwrap();
        let st = GcdColumnState::init(&sub, 0, &[0.0, 0.0]);
        assert!(best_correction(&st, &sub.gram_diag()).is_err());
    }

    #[test]
    fn mu_single_column() {
        let cross = DenseMatrix::from_rows(&[&[3.0]]).unwrap();
        let sub = NnlsSubproblem::from_parts(eye(1), cross).unwrap();
        // x0 = 0 -> g = (-3), mu = 4.5
        let mu = compute_mu(&sub, &DenseMatrix::zeros(1, 1)).unwrap();
        assert_eq!(mu, 4.5);
    }

    #[test]
    fn mu_zero_at_optimum() {
        let mut rng = Rng64::new(79);
        let c: DenseMatrix<f64> = rand_matrix(&mut rng, 6, 3);
        let b = DenseMatrix::from_fn(6, 4, |_, _| rng.uniform() - 0.5);
        let sub = build_subproblem(&c, &b).unwrap();
        let (xstar, _) =
            bpp_solve_matrix(&sub, &DenseMatrix::zeros(3, 4), &BppConfig::default()).unwrap();
        let mu = compute_mu(&sub, &xstar).unwrap();
        assert!(mu <= 1e-12, "mu = {mu}");
    }

    #[test]
    fn mu_matches_exhaustive_scan() {
        let mut rng = Rng64::new(83);
        let c: DenseMatrix<f64> = rand_matrix(&mut rng, 5, 3);
        let b = DenseMatrix::from_fn(5, 4, |_, _| rng.uniform() - 0.5);
        let sub = build_subproblem(&c, &b).unwrap();
        let x0 = DenseMatrix::from_fn(3, 4, |_, _| rng.uniform());
        let mu = compute_mu(&sub, &x0).unwrap();
        let mut brute = 0.0_f64;
        for h in 0..4 {
            let st = GcdColumnState::init(&sub, h, x0.col(h));
            for i in 0..3 {
                let qii = sub.gram().get(i, i);
                let r = st.g[i] / qii;
                let lam = if r <= st.x[i] { -r } else { -st.x[i] };
                let d = -st.g[i] * lam - 0.5 * qii * lam * lam;
                brute = brute.max(d);
            }
        }
        assert!((mu - brute).abs() <= 1e-14);
    }

    #[test]
    fn identity_problem_two_corrections() {
        let sub = build_subproblem(&eye(2), &eye(2)).unwrap();
        let out = gcd_solve_matrix(&sub, &DenseMatrix::zeros(2, 2), &GcdConfig::default())
            .unwrap();
        assert_eq!(out.corrections, 2);
        assert_eq!(out.x, eye(2));
    }

    #[test]
    fn tight_eta_matches_bpp_objective() {
        let mut rng = Rng64::new(89);
        let c: DenseMatrix<f64> = rand_matrix(&mut rng, 6, 4);
        let b = DenseMatrix::from_fn(6, 5, |_, _| rng.uniform() - 0.5);
        let sub = build_subproblem(&c, &b).unwrap();
        let x0 = DenseMatrix::zeros(4, 5);
        let gcd = gcd_solve_matrix(&sub, &x0, &GcdConfig::with_eta(1e-12)).unwrap();
        let (bpp, _) = bpp_solve_matrix(&sub, &x0, &BppConfig::default()).unwrap();
        for h in 0..5 {
            let fg = crate::test_util::column_objective(&c, b.col(h), gcd.x.col(h));
            let fb = crate::test_util::column_objective(&c, b.col(h), bpp.col(h));
            assert!(fg <= fb + 1e-6 * (1.0 + fb.abs()), "col {h}: {fg} vs {fb}");
        }
    }

    #[test]
    fn exact_start_needs_no_corrections() {
        let mut rng = Rng64::new(97);
        let c: DenseMatrix<f64> = rand_matrix(&mut rng, 6, 3);
        let b = DenseMatrix::from_fn(6, 4, |_, _| rng.uniform() - 0.5);
        let sub = build_subproblem(&c, &b).unwrap();
        let (xstar, _) =
            bpp_solve_matrix(&sub, &DenseMatrix::zeros(3, 4), &BppConfig::default()).unwrap();
        let out = gcd_solve_matrix(&sub, &xstar, &GcdConfig::default()).unwrap();
        assert_eq!(out.corrections, 0);
        assert_eq!(out.x, xstar);
    }

    #[test]
    fn corrections_monotone_and_gradient_consistent() {
        let mut rng = Rng64::new(101);
        let q: DenseMatrix<f64> = rand_spd(&mut rng, 4);
        let rhs: Vec<f64> = (0..4).map(|_| rng.uniform() - 0.5).collect();
        let cross = DenseMatrix::new(4, 1, rhs.clone()).unwrap();
        let sub = NnlsSubproblem::from_parts(q.clone(), cross).unwrap();
        let diag = sub.gram_diag();
        let mut st = GcdColumnState::init(&sub, 0, &[0.5; 4]);
        for _ in 0..50 {
            let (i, lam, d) = best_correction(&st, &diag).unwrap();
            if d <= 0.0 {
                break;
            }
            let before = column_objective_implicit(&q, &rhs, &st.x);
            st.apply(&q, i, lam);
            let after = column_objective_implicit(&q, &rhs, &st.x);
            assert!(d >= 0.0);
            assert!((before - after - d).abs() <= 1e-10 * (1.0 + d));
            assert!(st.x.iter().all(|&v| v >= 0.0));
            // recomputed gradient matches the maintained one
            for t in 0..4 {
                let mut g = -rhs[t];
                for j in 0..4 {
                    g += q.get(t, j) * st.x[j];
                }
                assert!((g - st.g[t]).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn eta_ladder_weakly_improves() {
        let mut rng = Rng64::new(103);
        let c: DenseMatrix<f64> = rand_matrix(&mut rng, 6, 4);
        let b = DenseMatrix::from_fn(6, 5, |_, _| rng.uniform() - 0.5);
        let sub = build_subproblem(&c, &b).unwrap();
        let x0 = DenseMatrix::zeros(4, 5);
        let mut prev = f64::INFINITY;
        for l in 1..=5 {
            let eta = 10f64.powi(-l);
            let out = gcd_solve_matrix(&sub, &x0, &GcdConfig::with_eta(eta)).unwrap();
            let total: f64 = (0..5)
                .map(|h| crate::test_util::column_objective(&c, b.col(h), out.x.col(h)))
                .sum();
            assert!(total <= prev + 1e-12);
            prev = total;
        }
    }
}
