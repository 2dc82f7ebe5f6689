//! Command-line surface for the adaptive random quantum eigensolver: seeded
//! protocol ensembles, knot-set optimization, benchmark campaigns, and
//! distribution tabulation. Every output embeds its resolved configuration
//! and master seed, and identical invocations are byte-identical.

mod commands;
mod config;
mod output;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use arqe_core::KnotSet;

use commands::benchmark::Arm;
use config::{CriterionChoice, Experiment, ExperimentConfig};
use output::OutputDir;

#[derive(Parser)]
#[command(name = "arqe", version, about = "Adaptive random quantum eigensolver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded protocol ensembles for each configured target index
    Solve(RunArgs),
    /// Optimize the mutation distribution's knots under the configured criterion
    Optimize(RunArgs),
    /// Per-instance optimization campaign with uniform/optimized comparison
    Benchmark(BenchmarkArgs),
    /// Tabulate (x, F(x), D(x)) for a knot set as CSV
    Pdfdump(KnotArgs),
    /// Draw seeded samples from a knot-parametrized distribution
    Sample(SampleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML, or resolved JSON)
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the repetition count
    #[arg(long)]
    reps: Option<usize>,
    /// Override the cost criterion (speed | accuracy | accuracy-fidelity | accuracy-final-w)
    #[arg(long)]
    criterion: Option<String>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Which arm(s) to evaluate
    #[arg(long, value_enum, default_value = "both")]
    arm: Arm,
}

#[derive(Args)]
struct KnotArgs {
    /// Knot set JSON ({"xs": [...], "ys": [...]})
    #[arg(long)]
    knots: Option<PathBuf>,
    /// Use the uniform baseline with this many interior knots instead
    #[arg(long)]
    uniform: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    knots: KnotArgs,
    /// Number of draws
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    if let Err(error) = run() {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    configure_thread_pool()?;
    match Cli::parse().command {
        Command::Solve(args) => {
            let (experiment, out) = prepare(&args)?;
            commands::solve::run(&experiment, &out)
        }
        Command::Optimize(args) => {
            let (experiment, out) = prepare(&args)?;
            commands::optimize::run(&experiment, &out)
        }
        Command::Benchmark(args) => {
            let (experiment, out) = prepare(&args.run)?;
            commands::benchmark::run(&experiment, &out, args.arm)
        }
        Command::Pdfdump(args) => {
            let knots = load_knot_args(&args)?;
            let out = OutputDir::create(&args.out)?;
            commands::distribution::pdfdump(&knots, &out)
        }
        Command::Sample(args) => {
            let knots = load_knot_args(&args.knots)?;
            let out = OutputDir::create(&args.knots.out)?;
            commands::distribution::sample(&knots, args.count, args.seed, &out)
        }
    }
}

/// ARQE_THREADS caps the worker count; it changes wall time only, results
/// are reduced in repetition order regardless.
fn configure_thread_pool() -> Result<()> {
    if let Ok(value) = std::env::var("ARQE_THREADS") {
        let threads: usize = value
            .parse()
            .with_context(|| format!("ARQE_THREADS must be a positive integer, got '{value}'"))?;
        if threads == 0 {
            bail!("ARQE_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("thread pool already initialized")?;
    }
    Ok(())
}

fn prepare(args: &RunArgs) -> Result<(Experiment, OutputDir)> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.run.seed = seed;
    }
    if let Some(reps) = args.reps {
        config.run.repetitions = Some(reps);
    }
    if let Some(criterion) = &args.criterion {
        config.run.criterion = CriterionChoice::parse(criterion)?;
    }
    if let Some(out) = &args.out {
        config.output.dir = out.display().to_string();
    }
    let base = args.config.parent().unwrap_or(std::path::Path::new("."));
    let experiment = Experiment::build(config, base)?;
    let out = OutputDir::create(std::path::Path::new(&experiment.config.output.dir))?;
    Ok((experiment, out))
}

fn load_knot_args(args: &KnotArgs) -> Result<KnotSet> {
    match (&args.knots, args.uniform) {
        (Some(path), None) => config::load_knots_file(path),
        (None, Some(n)) => {
            if n == 0 {
                bail!("--uniform needs at least one interior knot");
            }
            Ok(KnotSet::uniform(n))
        }
        (Some(_), Some(_)) => bail!("--knots and --uniform are mutually exclusive"),
        (None, None) => bail!("one of --knots or --uniform is required"),
    }
}
