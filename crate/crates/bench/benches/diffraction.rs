use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qreading_bench::{amplitude_cell, fast_options, geometry};
use qreading_core::diffraction::{
    gram_matrix, gram_matrix_with, rate_bounds, tau_extrema, toeplitz_symbol, GramMethod,
    DEFAULT_SYMBOL_GRID,
};
use qreading_core::{DiffractionScope, TransmitterSpec};
use std::hint::black_box;

fn symbol(c: &mut Criterion) {
    let mut group = c.benchmark_group("tau_extrema");
    for ratio in [0.5, 2.0, 100.0] {
        let geom = geometry(ratio, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(ratio), &geom, |b, g| {
            b.iter(|| tau_extrema(g, DEFAULT_SYMBOL_GRID).unwrap())
        });
    }
    group.finish();
    let geom = geometry(3.0, 0.5);
    c.bench_function("toeplitz_symbol", |b| {
        b.iter(|| toeplitz_symbol(&geom, black_box(0.37)))
    });
}

fn gram(c: &mut Criterion) {
    let geom = geometry(1.0, 0.5);
    let mut group = c.benchmark_group("gram_matrix/64");
    group.bench_function("adaptive", |b| b.iter(|| gram_matrix(&geom, 64).unwrap()));
    group.bench_function("sine_integral", |b| {
        b.iter(|| gram_matrix_with(&geom, 64, GramMethod::SineIntegral).unwrap())
    });
    group.finish();
}

fn bounds(c: &mut Criterion) {
    let opts = fast_options();
    let tx = TransmitterSpec::coherent(0.1).unwrap();
    let geom = geometry(2.0, 0.1);
    let mut group = c.benchmark_group("rate_bounds");
    group.sample_size(10);
    group.bench_function("coherent", |b| {
        b.iter(|| {
            rate_bounds(&amplitude_cell(), &tx, &geom, 1.0, &opts, DiffractionScope::SignalOnly)
                .unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, symbol, gram, bounds);
criterion_main!(benches);
