use std::path::Path;

use spdgeo::geometry::fi_distance;
use spdgeo::means::{ale_mean, bhat_mean, fi_mean_mm, le_mean, SolverConfig};
use spdgeo::simgen::{generate, GeneratorConfig};
use spdgeo::Result;

use crate::csv::{num, Csv};
use crate::plot::{write_svg, Marker, Panel, Scale, Series, PALETTE};

use super::rng_metadata;

pub struct Params<'a> {
    pub sigmas: &'a [f64],
    pub conds: &'a [f64],
    pub repeats: usize,
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    pub eps: f64,
    pub max_iter: usize,
    pub out_dir: &'a Path,
    pub csv_only: bool,
}

struct Row {
    sigma: f64,
    kappa: f64,
    repeat: usize,
    algo: &'static str,
    distance: f64,
}

pub fn run(p: Params) -> Result<u8> {
    std::fs::create_dir_all(p.out_dir)?;
    let cfg = SolverConfig {
        epsilon: p.eps,
        max_iter: p.max_iter,
        initial_step: 1.0,
    };

    let mut rows = Vec::new();
    let mut flags = Vec::new();
    let mut exit = 0u8;
    for (si, &sigma) in p.sigmas.iter().enumerate() {
        for (ci, &kappa) in p.conds.iter().enumerate() {
            for repeat in 0..p.repeats {
                // one seed per (sigma, cond, repeat) cell, derived by flat
                // index so reruns and reorderings agree
                let offset = ((si * p.conds.len() + ci) * p.repeats + repeat) as u64;
                let seed = p.seed.wrapping_add(offset);
                let mut gcfg = GeneratorConfig::new(p.dim, p.count, sigma, seed);
                gcfg.cond_target = Some(kappa);
                let set = generate(&gcfg)?.set;

                let bench = fi_mean_mm(&set, &cfg)?;
                if !bench.converged {
                    flags.push(format!(
                        "benchmark-not-converged: sigma={} kappa={} repeat={repeat}",
                        num(sigma),
                        num(kappa)
                    ));
                    exit = 3;
                    continue;
                }
                let le = le_mean(&set)?;
                let bha = bhat_mean(&set, &cfg)?;
                let ale = ale_mean(&set, &cfg)?;
                for (algo, mean, converged) in [
                    ("LE", &le, true),
                    ("Bha", &bha.mean, bha.converged),
                    ("ALE", &ale.mean, ale.converged),
                ] {
                    if !converged {
                        flags.push(format!(
                            "not-converged: sigma={} kappa={} repeat={repeat} algorithm={algo}",
                            num(sigma),
                            num(kappa)
                        ));
                        exit = exit.max(2);
                    }
                    rows.push(Row {
                        sigma,
                        kappa,
                        repeat,
                        algo,
                        distance: fi_distance(mean, &bench.mean)?,
                    });
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        a.sigma
            .total_cmp(&b.sigma)
            .then(a.kappa.total_cmp(&b.kappa))
            .then(a.repeat.cmp(&b.repeat))
            .then(a.algo.cmp(b.algo))
    });

    let mut metadata = rng_metadata(p.seed);
    metadata.push(format!(
        "dim: {}, count: {}, repeats: {}",
        p.dim, p.count, p.repeats
    ));
    metadata.push("per-repeat seed: base seed + flat index over (sigma, cond, repeat)".into());
    metadata.push("distance: fi_distance to the MM mean of the same set".into());
    let mut csv = Csv::create(
        &p.out_dir.join("fig7.csv"),
        "sigma,kappa,repeat,algorithm,distance",
        &metadata,
    )?;
    for r in &rows {
        csv.row(&[
            num(r.sigma),
            num(r.kappa),
            r.repeat.to_string(),
            r.algo.into(),
            num(r.distance),
        ])?;
    }
    for f in &flags {
        csv.flag(f)?;
    }
    csv.finish()?;

    if !p.csv_only {
        let panels = p
            .sigmas
            .iter()
            .map(|&sigma| {
                let series = [
                    ("ALE", Marker::Circle),
                    ("Bha", Marker::Triangle),
                    ("LE", Marker::Diamond),
                ]
                .iter()
                .enumerate()
                .map(|(i, (algo, marker))| {
                    // mean over repeats per condition number
                    let points = p
                        .conds
                        .iter()
                        .map(|&kappa| {
                            let cell: Vec<f64> = rows
                                .iter()
                                .filter(|r| {
                                    r.sigma == sigma && r.kappa == kappa && r.algo == *algo
                                })
                                .map(|r| r.distance)
                                .collect();
                            let mean = cell.iter().sum::<f64>() / cell.len().max(1) as f64;
                            (kappa, mean)
                        })
                        .collect();
                    Series {
                        label: (*algo).into(),
                        points,
                        marker: *marker,
                        color: PALETTE[i],
                        line: true,
                    }
                })
                .collect();
                Panel {
                    title: format!("sigma = {}", num(sigma)),
                    x_label: "mixing condition number".into(),
                    y_label: "distance to MM mean".into(),
                    x_scale: Scale::Log10,
                    y_scale: Scale::Log10,
                    series,
                }
            })
            .collect::<Vec<_>>();
        write_svg(&p.out_dir.join("fig7.svg"), &panels)?;
    }
    Ok(exit)
}
