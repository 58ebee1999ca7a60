use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use qreading_bench::{amplitude_cell, fast_options, phase_cell};
use qreading_core::channels::{apply_classical_noise, displacement_matrix};
use qreading_core::rates::holevo_rate;
use qreading_core::states::{coherent_state, Truncation};
use qreading_core::{RateOptions, TransmitterSpec};
use std::hint::black_box;

fn channel(c: &mut Criterion) {
    c.bench_function("displacement_matrix/60", |b| {
        b.iter(|| displacement_matrix(black_box(Complex64::new(1.3, -0.4)), 60))
    });
    let rho = coherent_state(Complex64::new(1.0, 0.0), Truncation::single_mode())
        .unwrap()
        .density();
    c.bench_function("classical_noise/coherent", |b| {
        b.iter(|| apply_classical_noise(black_box(&rho), 0.5, 0, 20).unwrap())
    });
}

fn rates(c: &mut Criterion) {
    let opts = fast_options();
    // 30 levels per mode leave too much weight outside the box once noise is on.
    let pair_opts = RateOptions { pair_dim: 40, ..opts };
    let mut group = c.benchmark_group("holevo_rate");
    group.sample_size(10);
    for n_th in [0.0, 0.5] {
        group.bench_with_input(BenchmarkId::new("coherent", n_th), &n_th, |b, &n_th| {
            let tx = TransmitterSpec::coherent(1.0).unwrap();
            b.iter(|| holevo_rate(&amplitude_cell(), &tx, n_th, &opts).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("epr", n_th), &n_th, |b, &n_th| {
            let tx = TransmitterSpec::epr(1.0, 1).unwrap();
            b.iter(|| holevo_rate(&phase_cell(), &tx, n_th, &pair_opts).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, channel, rates);
criterion_main!(benches);
