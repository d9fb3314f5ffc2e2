use std::io::Write;
use std::path::Path;

use spdgeo::io::{read_set_file, write_set, write_set_file};
use spdgeo::means::SolverConfig;
use spdgeo::{MatrixSet, Result};

use crate::registry::{run_mean, Algo};

pub fn run(
    algo: &str,
    input: &Path,
    eps: f64,
    max_iter: usize,
    out: Option<&Path>,
) -> Result<u8> {
    let algo = Algo::parse(algo)?;
    let set = read_set_file(input)?;
    let cfg = SolverConfig {
        epsilon: eps,
        max_iter,
        initial_step: 1.0,
    };
    let run = run_mean(algo, &set, &cfg)?;

    let comments = vec![
        format!("algo: {}", algo.name()),
        format!("source: {}", input.display()),
        format!("iterations: {}", run.iterations),
        format!("converged: {}", run.converged),
        format!("final_residual: {:e}", run.final_residual),
    ];
    let converged = run.converged;
    let single = MatrixSet::new(vec![run.mean])?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    write_set(&mut lock, &single, &comments)?;
    lock.flush()?;
    if let Some(path) = out {
        write_set_file(path, &single, &comments)?;
    }
    Ok(if converged { 0 } else { 2 })
}
