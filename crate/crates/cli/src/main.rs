//! `spdbench` — benchmark and experiment harness for the `spdgeo` crate.
//!
//! Subcommands: `generate` (synthetic SPD sets with stored ground truth),
//! `mean` / `ajd` (run one estimator on a stored set), `fig5` / `fig6` /
//! `fig7` (the three canned experiments: solver convergence traces,
//! trace/determinant comparison, distance-to-benchmark versus mixing
//! condition number) and `props` (the randomized property suite).
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 solver non-convergence,
//! 3 experiment-level flag (a run that finished but left flagged rows).
//!
//! All outputs are deterministic functions of the flags: CSV files carry
//! their generating parameters as `#` comments, plots are static SVG
//! rebuilt byte-for-byte from the same values, and nothing machine- or
//! time-dependent is ever written.

mod commands;
mod csv;
mod plot;
mod registry;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "spdbench", version, about = "SPD matrix-set experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SolverFlags {
    /// Solver stopping tolerance.
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    /// Iteration cap for the iterative solvers.
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic SPD set (with its mixing ground truth) to a file.
    Generate {
        /// Matrix dimension N.
        #[arg(long)]
        dim: usize,
        /// Number of matrices K.
        #[arg(long)]
        count: usize,
        /// Noise level; 0 gives an exactly jointly diagonalizable set.
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        seed: u64,
        /// Exact condition number for the mixing matrix (default: raw
        /// Gaussian draw).
        #[arg(long)]
        cond: Option<f64>,
        /// Output path for the `spdset v1` file.
        #[arg(long)]
        out: PathBuf,
        /// Output path for the `spdtruth v1` sibling (default: `<out>.truth`).
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Compute a mean of a stored set and print it as a one-matrix set.
    Mean {
        /// One of: GD, MM, Bha, LE, ALE, Arithmetic, Harmonic.
        #[arg(long)]
        algo: String,
        /// Input `spdset v1` file.
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        /// Also write the printed block to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Jointly diagonalize a stored set and print the transform.
    Ajd {
        /// Input `spdset v1` file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Stop once a sweep improves the criterion by less than this many
        /// dB relative to its initial value.
        #[arg(long, default_value_t = -100.0)]
        db: f64,
        #[arg(long, default_value_t = 1000)]
        max_sweeps: usize,
        /// Also write the printed block to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-iteration convergence traces of GD, MM, Bha and AJD-Pham across
    /// noise levels, down to a -100 dB stop.
    Fig5 {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.01, 0.1, 1.0])]
        sigmas: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Reach threshold in dB relative to each algorithm's initial
        /// criterion value.
        #[arg(long, default_value_t = -100.0)]
        db: f64,
        /// Iteration cap per algorithm.
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
        /// Directory for `fig5.csv` (+ `fig5.svg`).
        #[arg(long)]
        out_dir: PathBuf,
        /// Skip the SVG plot.
        #[arg(long)]
        csv_only: bool,
    },
    /// Trace and log-determinant of the GD, MM, LE, Bha and ALE means
    /// across noise levels.
    Fig6 {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.01, 0.05, 0.1, 0.2])]
        sigmas: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        solver: SolverFlags,
        /// Directory for `fig6.csv` (+ `fig6.svg`).
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        csv_only: bool,
    },
    /// Distance of the LE, Bha and ALE means to the Riemannian benchmark
    /// (MM) across mixing condition numbers and noise levels.
    Fig7 {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.01, 0.1, 1.0])]
        sigmas: Vec<f64>,
        /// Mixing-matrix condition numbers to sweep.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0])]
        conds: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        repeats: usize,
        #[arg(long, default_value_t = 10)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        solver: SolverFlags,
        /// Directory for `fig7.csv` (+ `fig7.svg`).
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        csv_only: bool,
    },
    /// Run the randomized property suite and report per-property verdicts.
    Props {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        trials: usize,
    },
}

fn run(cli: Cli) -> spdgeo::Result<u8> {
    match cli.cmd {
        Cmd::Generate {
            dim,
            count,
            sigma,
            seed,
            cond,
            out,
            truth,
        } => commands::generate::run(dim, count, sigma, seed, cond, &out, truth.as_deref()),
        Cmd::Mean {
            algo,
            input,
            solver,
            out,
        } => commands::mean::run(&algo, &input, solver.eps, solver.max_iter, out.as_deref()),
        Cmd::Ajd {
            input,
            db,
            max_sweeps,
            out,
        } => commands::ajd::run(&input, db, max_sweeps, out.as_deref()),
        Cmd::Fig5 {
            sigmas,
            dim,
            count,
            seed,
            db,
            max_iter,
            out_dir,
            csv_only,
        } => commands::fig5::run(&sigmas, dim, count, seed, db, max_iter, &out_dir, csv_only),
        Cmd::Fig6 {
            sigmas,
            dim,
            count,
            seed,
            solver,
            out_dir,
            csv_only,
        } => commands::fig6::run(
            &sigmas,
            dim,
            count,
            seed,
            solver.eps,
            solver.max_iter,
            &out_dir,
            csv_only,
        ),
        Cmd::Fig7 {
            sigmas,
            conds,
            repeats,
            dim,
            count,
            seed,
            solver,
            out_dir,
            csv_only,
        } => commands::fig7::run(commands::fig7::Params {
            sigmas: &sigmas,
            conds: &conds,
            repeats,
            dim,
            count,
            seed,
            eps: solver.eps,
            max_iter: solver.max_iter,
            out_dir: &out_dir,
            csv_only,
        }),
        Cmd::Props { seed, trials } => commands::props::run(seed, trials),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here too; only real usage errors are
            // failures
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
