use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use trapnoise::inference::{
    fit_surface_models, fit_temperature_models, loglog_spline_slope, noise_curve_from_dataset, Smoothing,
};
use trapnoise::patch_field::{scene_integrals, PatchOptions, PatchScene};
use trapnoise::{greens_parallel, Ion};
use trapnoise_bench::{reference_dataset, ybco_on_sapphire};

const OMEGA: f64 = 2.0 * PI * 1.0e6;

fn greens(c: &mut Criterion) {
    let stack = ybco_on_sapphire();
    c.bench_function("greens_parallel/normal_state", |b| {
        b.iter(|| greens_parallel(black_box(&stack), OMEGA, 120.0, 225e-6, 1e-6).unwrap())
    });
    c.bench_function("greens_parallel/superconducting", |b| {
        b.iter(|| greens_parallel(black_box(&stack), OMEGA, 44.5, 225e-6, 1e-6).unwrap())
    });
}

fn patches(c: &mut Criterion) {
    let scene = PatchScene::reference_chip();
    let opts = PatchOptions::default();
    c.bench_function("scene_integrals/hierarchical_1um", |b| {
        b.iter(|| scene_integrals(black_box(&scene), &opts).unwrap())
    });
}

fn fits(c: &mut Criterion) {
    let ds = reference_dataset(42);
    let curve = noise_curve_from_dataset(&ds, Ion::CA40).unwrap();
    let mut group = c.benchmark_group("fits");
    group.sample_size(20);
    group.bench_function("temperature_models", |b| b.iter(|| fit_temperature_models(black_box(&ds)).unwrap()));
    group.bench_function("surface_models", |b| b.iter(|| fit_surface_models(black_box(&curve)).unwrap()));
    group.bench_function("loglog_spline_gcv", |b| {
        b.iter(|| loglog_spline_slope(black_box(&curve), Smoothing::Gcv).unwrap())
    });
    group.finish();
}

criterion_group!(benches, greens, patches, fits);
criterion_main!(benches);
