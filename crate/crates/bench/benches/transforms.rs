use alcove_bench::brownian;
use alcove_core::crystal::cutoff_for_tail;
use alcove_core::path::corrected_cascades;
use alcove_core::{
    enumerate_module, pitman, pitman_cascade, DirectionSequence, PiecewiseLinearPath, RootSystem,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn pitman_transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("pitman");
    for dt in [1e-2, 1e-3] {
        let rs = RootSystem::new(2).unwrap();
        let path = brownian(&rs, dt, 1);
        group.bench_with_input(BenchmarkId::from_parameter(path.len()), &path, |b, p| {
            b.iter(|| pitman(&rs, black_box(p), 1))
        });
    }
    group.finish();
}

fn cascades(c: &mut Criterion) {
    let mut group = c.benchmark_group("cascade");
    group.sample_size(20);
    for n in [1, 2] {
        let rs = RootSystem::new(n).unwrap();
        let seq = DirectionSequence::cyclic(n);
        let u = rs.correction_vector(&seq).unwrap();
        let path = brownian(&rs, 1e-3, 2);
        let depth = 7 * (n + 1);
        group.bench_function(BenchmarkId::new("pitman", n), |b| {
            b.iter(|| pitman_cascade(&rs, black_box(&path), &seq, depth))
        });
        group.bench_function(BenchmarkId::new("corrected", n), |b| {
            b.iter(|| corrected_cascades(&rs, black_box(&path), &seq, &u, depth))
        });
    }
    group.finish();
}

fn catalogs(c: &mut Criterion) {
    let mut group = c.benchmark_group("catalog");
    group.sample_size(10);
    for (n, scale) in [(1, 2.0), (2, 4.0)] {
        let rs = RootSystem::new(n).unwrap();
        let nu_hat = rs.barycentric_drift() * scale;
        let e_max = cutoff_for_tail(&rs, &nu_hat, 1.0, 1e-6).unwrap();
        let generator = PiecewiseLinearPath::straight(&rs.lambda0(), 1.0);
        let seq = DirectionSequence::cyclic(n);
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| enumerate_module(&rs, &generator, &seq, &nu_hat, e_max).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, pitman_transform, cascades, catalogs);
criterion_main!(benches);
