use spdgeo::means::{
    ale_mean, arithmetic_mean, bhat_mean, fi_mean_gd, fi_mean_mm, harmonic_mean, le_mean,
    SolverConfig, SolverReport,
};
use spdgeo::{Error, MatrixSet, Result, SpdMatrix};

/// Every algorithm name that may appear in an output file.
pub const ALGORITHMS: [&str; 8] = [
    "GD",
    "MM",
    "Bha",
    "LE",
    "ALE",
    "AJD-Pham",
    "Arithmetic",
    "Harmonic",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Gd,
    Mm,
    Bha,
    Le,
    Ale,
    AjdPham,
    Arithmetic,
    Harmonic,
}

impl Algo {
    pub fn parse(name: &str) -> Result<Algo> {
        match name {
            "GD" => Ok(Algo::Gd),
            "MM" => Ok(Algo::Mm),
            "Bha" => Ok(Algo::Bha),
            "LE" => Ok(Algo::Le),
            "ALE" => Ok(Algo::Ale),
            "AJD-Pham" => Ok(Algo::AjdPham),
            "Arithmetic" => Ok(Algo::Arithmetic),
            "Harmonic" => Ok(Algo::Harmonic),
            _ => Err(Error::InvalidParameter(format!(
                "unknown algorithm {name:?}; expected one of {}",
                ALGORITHMS.join(", ")
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algo::Gd => "GD",
            Algo::Mm => "MM",
            Algo::Bha => "Bha",
            Algo::Le => "LE",
            Algo::Ale => "ALE",
            Algo::AjdPham => "AJD-Pham",
            Algo::Arithmetic => "Arithmetic",
            Algo::Harmonic => "Harmonic",
        }
    }
}

/// Uniform view over the iterative solvers and the closed-form means.
pub struct MeanRun {
    pub mean: SpdMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
}

fn closed_form(mean: SpdMatrix) -> MeanRun {
    MeanRun {
        mean,
        iterations: 0,
        converged: true,
        final_residual: 0.0,
    }
}

fn solved(report: SolverReport) -> MeanRun {
    MeanRun {
        mean: report.mean,
        iterations: report.iterations,
        converged: report.converged,
        final_residual: report.final_residual,
    }
}

pub fn run_mean(algo: Algo, set: &MatrixSet, cfg: &SolverConfig) -> Result<MeanRun> {
    match algo {
        Algo::Gd => Ok(solved(fi_mean_gd(set, cfg)?)),
        Algo::Mm => Ok(solved(fi_mean_mm(set, cfg)?)),
        Algo::Bha => Ok(solved(bhat_mean(set, cfg)?)),
        Algo::Le => Ok(closed_form(le_mean(set)?)),
        Algo::Ale => Ok(solved(ale_mean(set, cfg)?)),
        Algo::Arithmetic => Ok(closed_form(arithmetic_mean(set)?)),
        Algo::Harmonic => Ok(closed_form(harmonic_mean(set)?)),
        Algo::AjdPham => Err(Error::InvalidParameter(
            "AJD-Pham is a joint diagonalizer, not a mean; use the `ajd` subcommand".into(),
        )),
    }
}
