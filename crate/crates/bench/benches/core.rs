use std::hint::black_box;

use cable_core::chaos::{f_k_closed, f_sigma};
use cable_core::kernels::green;
use cable_core::rng::{GaussianStream, NoiseSource};
use cable_core::solver::run_ensemble;
use cable_core::stats::energy_test;
use cable_core::{Boundary, Grid, ModelParams, Representation, Sigma};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn params(len: f64) -> ModelParams {
    ModelParams::new(0.0, 1.0, len, 1.0, Boundary::Neumann, Sigma::affine(1.0, 0.0)).unwrap()
}

fn kernels(c: &mut Criterion) {
    let p = params(64.0);
    let mut g = c.benchmark_group("green");
    for rep in [Representation::ImageSum, Representation::Spectral] {
        g.bench_function(BenchmarkId::from_parameter(format!("{rep:?}")), |b| {
            b.iter(|| green(&p, rep, black_box(0.7), black_box(3.1), black_box(5.4), 1e-10).unwrap())
        });
    }
    g.finish();
}

fn chaos(c: &mut Criterion) {
    let p = params(64.0);
    c.bench_function("f_k_closed k=6", |b| b.iter(|| f_k_closed(&p, 6, black_box(0.8)).unwrap()));
    c.bench_function("f_sigma t=1", |b| b.iter(|| f_sigma(&p, black_box(1.0), 1e-10).unwrap()));
}

fn solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("ensemble");
    g.sample_size(10);
    for len in [16.0, 64.0] {
        let p = params(len);
        let grid = Grid::with_resolution(&p, 0.1, 0.25).unwrap();
        g.bench_function(BenchmarkId::new("32 replicates", len), |b| {
            b.iter(|| run_ensemble(&p, &grid, &[1.0], 32, 7).unwrap())
        });
    }
    g.finish();
}

fn energy(c: &mut Criterion) {
    let rows = |seed, n: usize, m: usize| -> Vec<Vec<f64>> {
        let mut src = GaussianStream::new(seed, 0);
        (0..n)
            .map(|i| {
                let mut v = vec![0.0; m];
                src.fill(i, &mut v);
                v
            })
            .collect()
    };
    let mut g = c.benchmark_group("energy_test");
    g.sample_size(10);
    for m in [1, 3] {
        let (x, y) = (rows(1, 1000, m), rows(2, 1000, m));
        g.bench_function(BenchmarkId::new("1000 vs 1000, 50 permutations", m), |b| {
            b.iter(|| energy_test(&x, &y, 50, 3).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, kernels, chaos, solver, energy);
criterion_main!(benches);
