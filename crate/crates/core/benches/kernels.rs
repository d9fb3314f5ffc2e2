//! Core kernel benchmarks. Run once with the default feature set and once
//! with `--no-default-features` to compare the data-parallel and sequential
//! builds:
//!
//! ```text
//! cargo bench -p spdgeo --bench kernels
//! cargo bench -p spdgeo --bench kernels --no-default-features
//! ```

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use spdgeo::ajd::{ajd_pham, AjdConfig};
use spdgeo::means::{ale_mean, fi_mean_gd, fi_mean_mm, le_mean, SolverConfig};
use spdgeo::set::MatrixSet;
use spdgeo::simgen::{generate, GeneratorConfig};

fn test_set(n: usize, k: usize) -> MatrixSet {
    generate(&GeneratorConfig::new(n, k, 0.1, 7)).unwrap().set
}

fn bench_generate(c: &mut Criterion) {
    let mut group = c.benchmark_group("generate");
    for (n, k) in [(10, 20), (20, 50)] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("n{n}k{k}")), &(n, k), |b, &(n, k)| {
            let cfg = GeneratorConfig::new(n, k, 0.1, 7);
            b.iter(|| generate(black_box(&cfg)).unwrap());
        });
    }
    group.finish();
}

fn bench_means(c: &mut Criterion) {
    let mut group = c.benchmark_group("means");
    let cfg = SolverConfig::default();
    for (n, k) in [(10, 20), (20, 50)] {
        let set = test_set(n, k);
        let id = format!("n{n}k{k}");
        group.bench_with_input(BenchmarkId::new("le", &id), &set, |b, set| {
            b.iter(|| le_mean(black_box(set)).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("fi-gd", &id), &set, |b, set| {
            b.iter(|| fi_mean_gd(black_box(set), &cfg).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("fi-mm", &id), &set, |b, set| {
            b.iter(|| fi_mean_mm(black_box(set), &cfg).unwrap());
        });
        group.bench_with_input(BenchmarkId::new("ale", &id), &set, |b, set| {
            b.iter(|| ale_mean(black_box(set), &cfg).unwrap());
        });
    }
    group.finish();
}

fn bench_ajd(c: &mut Criterion) {
    let mut group = c.benchmark_group("ajd");
    let cfg = AjdConfig::default();
    for (n, k) in [(10, 20), (20, 50)] {
        let set = test_set(n, k);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("n{n}k{k}")),
            &set,
            |b, set| {
                b.iter(|| ajd_pham(black_box(set), &cfg).unwrap());
            },
        );
    }
    group.finish();
}

criterion_group! {
    name = kernels;
    config = Criterion::default().sample_size(10);
    targets = bench_generate, bench_means, bench_ajd
}
criterion_main!(kernels);
