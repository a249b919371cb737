//! Multi-start experiment harness.
//!
//! An experiment fixes the input matrix, the factorization rank, the inner
//! solver, and the penalty update, then runs several starts from different
//! seeds. Starts are independent, so they fan out over a bounded pool of
//! scoped threads; results are keyed by seed and therefore deterministic
//! regardless of scheduling.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::InnerSolver;
use crate::matrix::DenseMatrix;
use crate::mtx::read_matrix_file;
use crate::similarity::{gen_synthetic, kernel_similarity, random_lowrank, KernelConfig, SyntheticKind};
use crate::sym::{sym_anls, BetaUpdate, IterationTrace, RunStatus, SymConfig};

/// Where the experiment matrix comes from.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixSource {
    /// MatrixMarket file on disk.
    File { path: String },
    /// Random `V V^T` with `V` n-by-p uniform.
    Class1 { n: usize, p: usize, seed: u64 },
    /// Synthetic 2-D point set through the Gaussian-kernel/normalized-cut
    /// pipeline.
    Synthetic { name: String, n: usize, seed: u64 },
}

impl MatrixSource {
    pub fn load(&self) -> Result<DenseMatrix<f64>> {
        match self {
            Self::File { path } => read_matrix_file(Path::new(path)),
            Self::Class1 { n, p, seed } => random_lowrank(*n, *p, *seed),
            Self::Synthetic { name, n, seed } => {
                let kind: SyntheticKind = name.parse()?;
                let set = gen_synthetic(kind, *n, *seed)?;
                kernel_similarity(&set, KernelConfig::Knn7)
            }
        }
    }
}

/// Inner solver choice in serializable form.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "solver", rename_all = "snake_case")]
pub enum InnerSpec {
    Bpp,
    Gcd { eta: f64 },
}

impl InnerSpec {
    pub fn build(&self) -> InnerSolver<f64> {
        match self {
            Self::Bpp => InnerSolver::bpp(),
            Self::Gcd { eta } => InnerSolver::gcd(*eta),
        }
    }
}

/// Penalty update choice in serializable form.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "update", rename_all = "snake_case")]
pub enum UpdateSpec {
    Ada,
    Geometric { zeta: f64 },
}

impl UpdateSpec {
    pub fn build(&self) -> BetaUpdate<f64> {
        match self {
            Self::Ada => BetaUpdate::Ada,
            Self::Geometric { zeta } => BetaUpdate::Geometric { zeta: *zeta },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentSpec {
    pub id: String,
    pub source: MatrixSource,
    pub k: usize,
    pub inner: InnerSpec,
    pub update: UpdateSpec,
    /// Number of starts; seeds are `base_seed .. base_seed + starts`.
    pub starts: usize,
    pub base_seed: u64,
    pub nu_max: usize,
    /// Worker-thread cap; starts never exceed it.
    pub jobs: usize,
}

impl ExperimentSpec {
    pub fn new(id: &str, source: MatrixSource, k: usize) -> Self {
        Self {
            id: id.to_string(),
            source,
            k,
            inner: InnerSpec::Gcd { eta: 1e-3 },
            update: UpdateSpec::Ada,
            starts: 5,
            base_seed: 0,
            nu_max: 500,
            jobs: 1,
        }
    }

    fn config(&self, seed: u64) -> SymConfig<f64> {
        SymConfig {
            k: self.k,
            nu_max: self.nu_max,
            inner: self.inner.build(),
            update: self.update.build(),
            seed,
            ..SymConfig::new(self.k)
        }
    }
}

/// One start of an experiment, trace included.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StartSummary {
    pub seed: u64,
    pub status: RunStatus,
    pub eps_s: f64,
    pub nu_tot: usize,
    pub corrections: u64,
    pub elapsed_s: f64,
    pub trace: Vec<IterationTrace>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Aggregate {
    pub mean_eps_s: f64,
    pub mean_nu_tot: f64,
    pub max_elapsed_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub n: usize,
    pub starts: Vec<StartSummary>,
    /// Index into `starts` of the best run: smallest final error, ties broken
    /// by fewer iterations, then by smaller seed.
    pub best: usize,
    pub aggregate: Aggregate,
}

impl ExperimentReport {
    pub fn best_start(&self) -> &StartSummary {
        &self.starts[self.best]
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("report serialization failed: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad report JSON: {e}")))
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_json()?.as_bytes())?;
        writeln!(w)?;
        Ok(())
    }

    /// `id  mean eps_S (3 dp)  mean nu (2 dp)  max T (2 dp)` summary line.
    pub fn summary_line(&self) -> String {
        format!(
            "{}: mean_eps_S={:.3} mean_nu={:.2} T={:.2}s",
            self.spec.id,
            self.aggregate.mean_eps_s,
            self.aggregate.mean_nu_tot,
            self.aggregate.max_elapsed_s
        )
    }
}

fn run_start(a: &DenseMatrix<f64>, spec: &ExperimentSpec, seed: u64) -> Result<StartSummary> {
    let t0 = Instant::now();
    let out = sym_anls(a, &spec.config(seed))?;
    Ok(StartSummary {
        seed,
        status: out.status,
        eps_s: out.final_eps_s(),
        nu_tot: out.nu_tot(),
        corrections: out.total_corrections(),
        elapsed_s: t0.elapsed().as_secs_f64(),
        trace: out.trace,
    })
}

fn pick_best(starts: &[StartSummary]) -> usize {
    let mut best = 0;
    for (i, s) in starts.iter().enumerate().skip(1) {
        let b = &starts[best];
        let better = s.eps_s < b.eps_s
            || (s.eps_s == b.eps_s
                && (s.nu_tot < b.nu_tot || (s.nu_tot == b.nu_tot && s.seed < b.seed)));
        if better {
            best = i;
        }
    }
    best
}

fn aggregate(starts: &[StartSummary]) -> Aggregate {
    let m = starts.len() as f64;
    Aggregate {
        mean_eps_s: starts.iter().map(|s| s.eps_s).sum::<f64>() / m,
        mean_nu_tot: starts.iter().map(|s| s.nu_tot as f64).sum::<f64>() / m,
        max_elapsed_s: starts.iter().map(|s| s.elapsed_s).fold(0.0, f64::max),
    }
}

/// Runs all starts of an experiment against an already-loaded matrix.
pub fn run_experiment_on(a: &DenseMatrix<f64>, spec: &ExperimentSpec) -> Result<ExperimentReport> {
    if spec.starts == 0 {
        return Err(Error::InvalidParameter("starts must be positive".into()));
    }
    let jobs = spec.jobs.max(1).min(spec.starts);
    let seeds: Vec<u64> = (0..spec.starts as u64).map(|i| spec.base_seed + i).collect();
    let mut results: Vec<Option<Result<StartSummary>>> = Vec::new();
    results.resize_with(seeds.len(), || None);

    if jobs == 1 {
        for (slot, &seed) in results.iter_mut().zip(&seeds) {
            *slot = Some(run_start(a, spec, seed));
        }
    } else {
        // bounded fan-out: chunk the seed list round-robin over `jobs` threads
        std::thread::scope(|scope| {
            let chunks: Vec<Vec<(usize, u64)>> = (0..jobs)
                .map(|t| {
                    seeds
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| i % jobs == t)
                        .map(|(i, &s)| (i, s))
                        .collect()
                })
                .collect();
            let mut handles = Vec::new();
            for chunk in chunks {
                handles.push(scope.spawn(move || {
                    chunk
                        .into_iter()
                        .map(|(i, seed)| (i, run_start(a, spec, seed)))
                        .collect::<Vec<_>>()
                }));
            }
            for h in handles {
                for (i, r) in h.join().expect("experiment worker panicked") {
                    results[i] = Some(r);
                }
            }
        });
    }

    let starts = results
        .into_iter()
        .map(|r| r.expect("all seeds scheduled"))
        .collect::<Result<Vec<_>>>()?;
    let best = pick_best(&starts);
    let aggregate = aggregate(&starts);
    Ok(ExperimentReport {
        spec: spec.clone(),
        n: a.rows(),
        starts,
        best,
        aggregate,
    })
}

/// Loads the matrix named by the spec and runs the experiment.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let a = spec.source.load()?;
    run_experiment_on(&a, spec)
}
