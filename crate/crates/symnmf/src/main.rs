use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use symnmf::bench::{run_experiment_on, ExperimentSpec, InnerSpec, MatrixSource, UpdateSpec};
use symnmf::csvio::{read_points_file, write_points_file};
use symnmf::error::Error;
use symnmf::mtx::write_matrix_file;
use symnmf::similarity::{gen_synthetic, kernel_similarity, KernelConfig};
use symnmf::sym::{write_trace_csv, RunStatus};

#[derive(Parser)]
#[command(name = "symnmf", about = "Symmetric nonnegative matrix factorization", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-start factorization experiment.
    Run(RunArgs),
    /// Generate a similarity matrix (MatrixMarket) from a generator spec or
    /// a CSV point file.
    Gen(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    /// MatrixMarket file, or a generator spec such as
    /// `gen:class1:n=2000,p=80` or `gen:wsn:n=1000`.
    #[arg(long)]
    matrix: String,

    /// Factorization rank.
    #[arg(long)]
    k: usize,

    /// Inner NNLS solver: `gcd` or `bpp`.
    #[arg(long, default_value = "gcd")]
    inner: String,

    /// GCD stopping tolerance (ignored for bpp).
    #[arg(long, default_value_t = 1e-3)]
    eta: f64,

    /// Penalty update: `ada` or `g<zeta>` (e.g. `g1.01`, `g1.4`).
    #[arg(long, default_value = "ada")]
    update: String,

    /// Number of starts with consecutive seeds.
    #[arg(long, default_value_t = 5)]
    starts: usize,

    /// Base seed; the SYMNMF_SEED environment variable overrides it.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Outer iteration cap per start.
    #[arg(long, default_value_t = 500)]
    numax: usize,

    /// Write the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write the best start's iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,

    /// Worker threads for the starts.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct GenArgs {
    /// Generator spec (`gen:class1:n=400,p=16`, `gen:sc:n=900`) or a CSV
    /// point file path.
    #[arg(long)]
    input: String,

    /// Output MatrixMarket path.
    #[arg(long)]
    out: PathBuf,

    /// Also write the generated points (generators only).
    #[arg(long)]
    points: Option<PathBuf>,

    /// Kernel scale rule for point inputs: `knn7`, `diameter`, or a number.
    #[arg(long, default_value = "knn7")]
    sigma: String,

    /// Seed for generators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parses `gen:<name>:k=v,k=v` generator specs.
fn parse_gen_spec(spec: &str, default_seed: u64) -> Result<MatrixSource> {
    let rest = spec
        .strip_prefix("gen:")
        .context("generator spec must start with 'gen:'")?;
    let (name, params) = match rest.split_once(':') {
        Some((n, p)) => (n, p),
        None => (rest, ""),
    };
    let mut n = None;
    let mut p = None;
    let mut seed = default_seed;
    for kv in params.split(',').filter(|s| !s.is_empty()) {
        let (key, value) = kv
            .split_once('=')
            .with_context(|| format!("bad generator parameter '{kv}'"))?;
        let parsed: u64 = value
            .parse()
            .with_context(|| format!("bad value in '{kv}'"))?;
        match key {
            "n" => n = Some(parsed as usize),
            "p" => p = Some(parsed as usize),
            "seed" => seed = parsed,
            other => bail!("unknown generator parameter '{other}'"),
        }
    }
    let n = n.context("generator spec needs n=<size>")?;
    match name {
        "class1" => Ok(MatrixSource::Class1 {
            n,
            p: p.context("class1 needs p=<rank>")?,
            seed,
        }),
        "wsn" | "sc" | "sk" | "dd" => {
            if p.is_some() {
                bail!("parameter p only applies to class1");
            }
            Ok(MatrixSource::Synthetic {
                name: name.to_string(),
                n,
                seed,
            })
        }
        other => bail!("unknown generator '{other}'"),
    }
}

fn resolve_source(matrix: &str, seed: u64) -> Result<MatrixSource> {
    if matrix.starts_with("gen:") {
        parse_gen_spec(matrix, seed)
    } else {
        Ok(MatrixSource::File {
            path: matrix.to_string(),
        })
    }
}

fn cmd_run(args: &RunArgs) -> Result<RunStatus> {
    let seed = match std::env::var("SYMNMF_SEED") {
        Ok(v) => v
            .parse()
            .with_context(|| format!("bad SYMNMF_SEED value '{v}'"))?,
        Err(_) => args.seed,
    };
    let inner = match args.inner.as_str() {
        "gcd" => InnerSpec::Gcd { eta: args.eta },
        "bpp" => InnerSpec::Bpp,
        other => bail!("unknown inner solver '{other}' (expected gcd or bpp)"),
    };
    let update = match args.update.as_str() {
        "ada" => UpdateSpec::Ada,
        g if g.starts_with('g') => {
            let zeta: f64 = g[1..]
                .parse()
                .with_context(|| format!("bad geometric factor in '{g}'"))?;
            if zeta <= 1.0 {
                bail!("geometric factor must exceed 1, got {zeta}");
            }
            UpdateSpec::Geometric { zeta }
        }
        other => bail!("unknown update rule '{other}' (expected ada or g<zeta>)"),
    };

    let mut spec = ExperimentSpec::new(&args.matrix, resolve_source(&args.matrix, seed)?, args.k);
    spec.inner = inner;
    spec.update = update;
    spec.starts = args.starts;
    spec.base_seed = seed;
    spec.nu_max = args.numax;
    spec.jobs = args.jobs;

    let a = spec.source.load().map_err(pretty_load_error)?;
    if args.k > a.rows() {
        bail!("k={} exceeds matrix order n={}", args.k, a.rows());
    }
    let report = run_experiment_on(&a, &spec)?;

    for s in &report.starts {
        println!(
            "seed={} status={:?} eps_S={:.6} nu={} corrections={} elapsed={:.2}s",
            s.seed, s.status, s.eps_s, s.nu_tot, s.corrections, s.elapsed_s
        );
    }
    println!("{}", report.summary_line());
    let best = report.best_start();
    println!(
        "best: seed={} eps_S={:.6} nu={}",
        best.seed, best.eps_s, best.nu_tot
    );

    if let Some(path) = &args.out {
        report
            .write_json(BufWriter::new(File::create(path)?))
            .with_context(|| format!("writing report to {}", path.display()))?;
    }
    if let Some(path) = &args.trace {
        write_trace_csv(&best.trace, BufWriter::new(File::create(path)?))
            .with_context(|| format!("writing trace to {}", path.display()))?;
    }

    let capped = report
        .starts
        .iter()
        .any(|s| s.status == RunStatus::IterationCap);
    Ok(if capped {
        RunStatus::IterationCap
    } else {
        RunStatus::Converged
    })
}

fn pretty_load_error(e: Error) -> anyhow::Error {
    anyhow::anyhow!("loading matrix failed: {e}")
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    if args.input.starts_with("gen:") {
        let source = parse_gen_spec(&args.input, args.seed)?;
        match &source {
            MatrixSource::Class1 { .. } => {
                if args.points.is_some() {
                    bail!("--points only applies to point-set generators");
                }
                let a = source.load()?;
                write_matrix_file(&args.out, &a, true)?;
            }
            MatrixSource::Synthetic { name, n, seed } => {
                let set = gen_synthetic(name.parse()?, *n, *seed)?;
                if let Some(path) = &args.points {
                    write_points_file(path, &set)?;
                }
                let a = kernel_similarity(&set, parse_sigma(&args.sigma)?)?;
                write_matrix_file(&args.out, &a, true)?;
            }
            MatrixSource::File { .. } => unreachable!("gen: prefix checked above"),
        }
    } else {
        let set = read_points_file(std::path::Path::new(&args.input))
            .with_context(|| format!("reading points from {}", args.input))?;
        let a = kernel_similarity(&set, parse_sigma(&args.sigma)?)?;
        write_matrix_file(&args.out, &a, true)?;
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

fn parse_sigma(text: &str) -> Result<KernelConfig> {
    Ok(match text {
        "knn7" => KernelConfig::Knn7,
        "diameter" => KernelConfig::Diameter,
        v => KernelConfig::Explicit(
            v.parse()
                .with_context(|| format!("bad sigma '{v}' (expected knn7, diameter, or a number)"))?,
        ),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Gen(args) => cmd_gen(args).map(|()| RunStatus::Converged),
    };
    match result {
        Ok(RunStatus::Converged) => ExitCode::SUCCESS,
        Ok(RunStatus::IterationCap) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
