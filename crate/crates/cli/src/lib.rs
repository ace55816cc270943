//! `minimax-meta`: experiment front end for the min-max meta-learning
//! solver. Three subcommands:
//!
//! - `run <spec>` — executes each configured (method, seed) run and
//!   writes `trace.csv` + `summary.csv` to the output directory.
//! - `rate-sweep <spec>` — runs the `[sweep]` grid of iteration counts,
//!   fits the empirical log-log rate, writes `rates.csv` (plus the trace
//!   and summary of the sweep runs).
//! - `project` — utility exposing the exact projections.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric abort.
//! `MINIMAX_META_SEED` overrides every seed list in the spec.

pub mod config;
pub mod csvout;
pub mod runner;

use clap::{ArgGroup, Parser, Subcommand};
use config::ConfigError;
use minimax_meta_core::geometry::{project_ball, project_simplex, FeasibleSet};
use minimax_meta_core::solver::SolverError;
use runner::{Prepared, RunnerError};
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser)]
#[command(
    name = "minimax-meta",
    about = "Distribution-agnostic min-max meta-learning experiments",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Execute the runs of an experiment spec and write CSV outputs.
    Run {
        /// Experiment spec file.
        spec: PathBuf,
        /// Override the spec's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Concurrent runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run the iteration-count sweep and fit the empirical rate.
    RateSweep {
        /// Experiment spec file (must contain a [sweep] section).
        spec: PathBuf,
        /// Override the spec's output directory.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Concurrent runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Project a vector onto the simplex or a centered ball.
    #[command(group(ArgGroup::new("target").required(true).args(["simplex", "ball"])))]
    Project {
        /// Project onto the probability simplex.
        #[arg(long)]
        simplex: bool,
        /// Project onto the ball of this radius centered at the origin.
        #[arg(long, value_name = "RADIUS")]
        ball: Option<f64>,
        /// Comma-separated vector, e.g. 0.2,0.3,0.5
        vector: String,
    },
}

/// Runs a parsed command line, returning the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Run { spec, output, jobs } => cmd_run(&spec, output.as_deref(), jobs),
        Command::RateSweep { spec, output, jobs } => {
            cmd_rate_sweep(&spec, output.as_deref(), jobs)
        }
        Command::Project {
            simplex,
            ball,
            vector,
        } => cmd_project(simplex, ball, &vector),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Runner(RunnerError),
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl From<RunnerError> for CliError {
    fn from(err: RunnerError) -> Self {
        match err {
            RunnerError::Config(c) => CliError::Config(c),
            other => CliError::Runner(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runner(RunnerError::Solver { source, .. }) => match source {
                SolverError::Config(_) | SolverError::Degenerate(_) => EXIT_CONFIG,
                _ => EXIT_NUMERIC,
            },
            CliError::Runner(_) | CliError::Io { .. } => EXIT_NUMERIC,
        }
    }
}

/// Applies the `MINIMAX_META_SEED` override to every seed list.
fn apply_seed_override(spec: &mut config::ExperimentSpec) -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("MINIMAX_META_SEED") else {
        return Ok(());
    };
    let seed: u64 = raw.parse().map_err(|_| {
        ConfigError::at(
            "MINIMAX_META_SEED",
            format!("cannot parse seed {raw:?}"),
        )
    })?;
    spec.run.seeds = vec![seed];
    if let Some(sweep) = spec.sweep.as_mut() {
        sweep.seeds = vec![seed];
    }
    Ok(())
}

fn prepare_output(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn write_with<F>(path: PathBuf, write: F) -> Result<(), CliError>
where
    F: FnOnce(&Path) -> std::io::Result<()>,
{
    write(&path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn cmd_run(spec_path: &Path, output: Option<&Path>, jobs: usize) -> Result<(), CliError> {
    let mut spec = config::load_experiment(spec_path)?;
    apply_seed_override(&mut spec)?;
    runner::validate_task_probs(&spec)?;
    let out_dir = output.unwrap_or(&spec.output).to_path_buf();
    let prepared = Prepared::new(&spec)?;
    let plans = runner::comparison_plans(&spec);
    let runs = runner::execute_all(&prepared, &plans, jobs)?;

    prepare_output(&out_dir)?;
    let lines = runner::trace_lines(&runs);
    write_with(out_dir.join("trace.csv"), |p| {
        csvout::write_trace(p, &lines)
    })?;
    let summaries: Vec<_> = runs.iter().map(|r| r.summary.clone()).collect();
    write_with(out_dir.join("summary.csv"), |p| {
        csvout::write_summary(p, &summaries)
    })?;
    println!(
        "wrote {} runs ({} trace rows) to {}",
        runs.len(),
        lines.len(),
        out_dir.display()
    );
    Ok(())
}

pub fn cmd_rate_sweep(
    spec_path: &Path,
    output: Option<&Path>,
    jobs: usize,
) -> Result<(), CliError> {
    let mut spec = config::load_experiment(spec_path)?;
    apply_seed_override(&mut spec)?;
    let out_dir = output.unwrap_or(&spec.output).to_path_buf();
    let prepared = Prepared::new(&spec)?;
    let (points, runs) = runner::run_rate_sweep(&prepared, jobs)?;

    prepare_output(&out_dir)?;
    write_with(out_dir.join("rates.csv"), |p| {
        csvout::write_rates(p, &points)
    })?;
    let lines = runner::trace_lines(&runs);
    write_with(out_dir.join("trace.csv"), |p| {
        csvout::write_trace(p, &lines)
    })?;
    let summaries: Vec<_> = runs.iter().map(|r| r.summary.clone()).collect();
    write_with(out_dir.join("summary.csv"), |p| {
        csvout::write_summary(p, &summaries)
    })?;
    if let Some(p) = points.first() {
        println!(
            "fitted slope {} (theoretical {}) over {} sweep points; outputs in {}",
            csvout::fmt_f64(p.fitted_slope),
            csvout::fmt_f64(p.theoretical_slope),
            points.len(),
            out_dir.display()
        );
    }
    Ok(())
}

pub fn cmd_project(simplex: bool, ball: Option<f64>, vector: &str) -> Result<(), CliError> {
    let parse = |s: &str| -> Result<Vec<f64>, ConfigError> {
        s.split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| ConfigError::at("vector", format!("cannot parse {:?}", x.trim())))
            })
            .collect()
    };
    let v = parse(vector)?;
    let projected = if simplex {
        project_simplex(&v)
            .map_err(|e| ConfigError::at("vector", e.to_string()))?
            .into_weights()
    } else {
        let radius = ball.expect("clap group guarantees one target");
        let set = FeasibleSet::ball(vec![0.0; v.len()], radius)
            .map_err(|e| ConfigError::at("ball", e.to_string()))?;
        project_ball(&v, &set).map_err(|e| ConfigError::at("vector", e.to_string()))?
    };
    let rendered: Vec<String> = projected.iter().map(|&x| csvout::fmt_f64(x)).collect();
    println!("{}", rendered.join(","));
    Ok(())
}
