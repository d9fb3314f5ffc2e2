use std::path::Path;

use spdgeo::means::{ale_mean, bhat_mean, fi_mean_gd, fi_mean_mm, le_mean, SolverConfig};
use spdgeo::simgen::{generate, GeneratorConfig};
use spdgeo::{Result, SpdMatrix};

use crate::csv::{num, Csv};
use crate::plot::{write_svg, Marker, Panel, Scale, Series, PALETTE};

use super::rng_metadata;

const LN_10: f64 = std::f64::consts::LN_10;

/// `10 log10 det`, computed from the Cholesky log-determinant so large
/// dimensions cannot overflow a raw determinant.
fn logdet_db(m: &SpdMatrix) -> Result<f64> {
    Ok(10.0 * m.ln_det()? / LN_10)
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    sigmas: &[f64],
    dim: usize,
    count: usize,
    seed: u64,
    eps: f64,
    max_iter: usize,
    out_dir: &Path,
    csv_only: bool,
) -> Result<u8> {
    std::fs::create_dir_all(out_dir)?;
    let cfg = SolverConfig {
        epsilon: eps,
        max_iter,
        initial_step: 1.0,
    };

    let mut metadata = rng_metadata(seed);
    metadata.push(format!("dim: {dim}, count: {count}"));
    metadata.push("logdet_db: 10*log10(determinant)".into());
    let mut csv = Csv::create(
        &out_dir.join("fig6.csv"),
        "sigma,algorithm,trace,logdet_db",
        &metadata,
    )?;

    let markers = [
        ("GD", Marker::Square),
        ("MM", Marker::Plus),
        ("LE", Marker::Diamond),
        ("Bha", Marker::Triangle),
        ("ALE", Marker::Circle),
    ];
    let mut all_converged = true;
    let mut panels = Vec::new();
    for &sigma in sigmas {
        let set = generate(&GeneratorConfig::new(dim, count, sigma, seed))?.set;

        let gd = fi_mean_gd(&set, &cfg)?;
        let mm = fi_mean_mm(&set, &cfg)?;
        let bha = bhat_mean(&set, &cfg)?;
        let ale = ale_mean(&set, &cfg)?;
        let le = le_mean(&set)?;

        for (name, _) in &markers {
            let (mean, converged) = match *name {
                "GD" => (&gd.mean, gd.converged),
                "MM" => (&mm.mean, mm.converged),
                "LE" => (&le, true),
                "Bha" => (&bha.mean, bha.converged),
                _ => (&ale.mean, ale.converged),
            };
            csv.row(&[
                num(sigma),
                (*name).into(),
                num(mean.trace()),
                num(logdet_db(mean)?),
            ])?;
            if !converged {
                csv.flag(&format!("not-converged: sigma={} algorithm={name}", num(sigma)))?;
                all_converged = false;
            }
        }

        let series = markers
            .iter()
            .enumerate()
            .map(|(i, (name, marker))| {
                let mean = match *name {
                    "GD" => &gd.mean,
                    "MM" => &mm.mean,
                    "LE" => &le,
                    "Bha" => &bha.mean,
                    _ => &ale.mean,
                };
                Ok(Series {
                    label: (*name).into(),
                    points: vec![(mean.trace(), logdet_db(mean)?)],
                    marker: *marker,
                    color: PALETTE[i],
                    line: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        panels.push(Panel {
            title: format!("sigma = {}", num(sigma)),
            x_label: "trace".into(),
            y_label: "determinant (dB)".into(),
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            series,
        });
    }
    csv.finish()?;
    if !csv_only {
        write_svg(&out_dir.join("fig6.svg"), &panels)?;
    }
    Ok(if all_converged { 0 } else { 2 })
}
