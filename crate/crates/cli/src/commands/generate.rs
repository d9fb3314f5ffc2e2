use std::path::{Path, PathBuf};

use spdgeo::io::{write_set_file, write_truth_file};
use spdgeo::simgen::{generate, GeneratorConfig};
use spdgeo::Result;

use super::rng_metadata;

#[allow(clippy::too_many_arguments)]
pub fn run(
    dim: usize,
    count: usize,
    sigma: f64,
    seed: u64,
    cond: Option<f64>,
    out: &Path,
    truth: Option<&Path>,
) -> Result<u8> {
    let mut cfg = GeneratorConfig::new(dim, count, sigma, seed);
    cfg.cond_target = cond;
    let gen = generate(&cfg)?;

    let mut comments = rng_metadata(seed);
    comments.push(format!("model: C_k = 10 (A D_k A^T + S_k), sigma = {sigma}"));
    if let Some(kappa) = cond {
        comments.push(format!("mixing condition number: {kappa}"));
    }
    comments.push(format!("noise_ratio: {}", gen.noise_ratio()));
    write_set_file(out, &gen.set, &comments)?;

    let default_truth = truth_sibling(out);
    let truth_path = truth.unwrap_or(&default_truth);
    write_truth_file(truth_path, &gen.a_true, &gen.d_true, &comments)?;

    println!("wrote {} and {}", out.display(), truth_path.display());
    println!("noise_ratio: {}", gen.noise_ratio());
    if gen.regenerated > 0 {
        println!("regenerated draws: {}", gen.regenerated);
    }
    Ok(0)
}

fn truth_sibling(out: &Path) -> PathBuf {
    let mut os = out.as_os_str().to_owned();
    os.push(".truth");
    PathBuf::from(os)
}
