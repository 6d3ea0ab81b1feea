use std::hint::black_box;

use carima_bench::fixture;
use carima_core::sim::{run_replication, ModelKind, StudyConfig};
use carima_core::{fit, log_likelihood, psi_weights, FitOptions};
use criterion::{criterion_group, criterion_main, Criterion};

fn likelihood(c: &mut Criterion) {
    let f = fixture();
    c.bench_function("kalman_loglik_911", |b| {
        b.iter(|| log_likelihood(&f.order, &f.params, black_box(&f.y), &f.x).unwrap())
    });
    c.bench_function("psi_weights_184", |b| b.iter(|| psi_weights(&f.order, black_box(&f.params), 184)));
}

fn estimation(c: &mut Criterion) {
    let f = fixture();
    let mut group = c.benchmark_group("estimation");
    group.sample_size(10);
    group.bench_function("fit_true_order", |b| {
        // the fixture already carries the intercept column
        let opts = FitOptions { intercept: false, ..FitOptions::default() };
        b.iter(|| fit(black_box(&f.y), &f.x, &f.order, &opts).unwrap())
    });
    let cfg = StudyConfig {
        models: vec![ModelKind::CarimaTrue],
        ..f.config.clone()
    };
    group.bench_function("replication_carima_true", |b| b.iter(|| run_replication(black_box(&cfg), 0)));
    group.finish();
}

criterion_group!(benches, likelihood, estimation);
criterion_main!(benches);
