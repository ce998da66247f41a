use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use distbound::evolution::{SpectralSemigroup, TranslationSemigroup};
use distbound::models::{build_gbm, SvenssonParams};
use distbound::sets::NonnegativeCone;
use distbound::spaces::FilipovicNorm;
use distbound::stochastic::{mc_distance, McConfig};
use distbound::{Curve, Grid, Semigroup, Space};

fn forward_space(points: usize) -> Space {
    let grid = Arc::new(Grid::log_spaced(30.0, points, 6.0).unwrap());
    Space::filipovic(0.1, grid, FilipovicNorm::Equivalent).unwrap()
}

fn svensson() -> SvenssonParams {
    SvenssonParams { z1: 0.01, z2: -0.04, z3: 0.03, z4: -0.02, z5: 0.01, z6: 0.8, z7: 1.7 }
}

fn cone_projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("cone_projection");
    group.sample_size(10);
    for points in [256, 2048] {
        let space = forward_space(points);
        let cone = NonnegativeCone::new(space.clone()).unwrap();
        let h = svensson().curve(&space);
        group.bench_with_input(BenchmarkId::from_parameter(points), &h, |b, h| {
            b.iter(|| cone.project(black_box(h)).unwrap().distance)
        });
    }
    group.finish();
}

fn spectral_semigroup(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_semigroup");
    for m in [127, 511] {
        let grid = Arc::new(Grid::unit_interior(m).unwrap());
        let semigroup = SpectralSemigroup::new(0.5, grid.clone(), None).unwrap();
        let h = Curve::from_fn(&grid, None, |x| x * (1.0 - x) * (5.0 * x).cos());
        group.bench_with_input(BenchmarkId::from_parameter(m), &h, |b, h| {
            b.iter(|| semigroup.apply(black_box(0.1), h))
        });
    }
    group.finish();
}

fn monotone_shift(c: &mut Criterion) {
    let space = forward_space(2048);
    let h = svensson().curve(&space);
    c.bench_function("translation_shift_2048", |b| b.iter(|| TranslationSemigroup.apply(black_box(0.37), &h)));
}

fn small_monte_carlo(c: &mut Criterion) {
    let gbm = build_gbm(0.05, 0.2).unwrap();
    let config = McConfig { horizon: 1.0, steps: 50, times: vec![0.5, 1.0], n_paths: 1000, seed: 1, fine_per_step: 1 };
    let x = Curve::scalar(1.0);
    let mut group = c.benchmark_group("monte_carlo");
    group.sample_size(20);
    group.bench_function("gbm_1000_paths", |b| b.iter(|| mc_distance(&gbm.model, &gbm.set, black_box(&x), &config).unwrap()));
    group.finish();
}

criterion_group!(benches, cone_projection, spectral_semigroup, monotone_shift, small_monte_carlo);
criterion_main!(benches);
