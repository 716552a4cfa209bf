//! Rayon versus sequential execution of the data-parallel entry points.
//!
//! Run with `cargo bench -p svident`. The comparison only makes sense with
//! the default `parallel` feature enabled; without it both arms take the
//! sequential path.

use criterion::{criterion_group, criterion_main, Criterion};
use svident::classifier::{scan_with, SVSpec};
use svident::exec::Parallelism;
use svident::falsifier::{identifiability_evidence_with, SearchConfig};
use svident::terracini::defectivity_scan_with;
use svident::Mode;

fn flagship() -> SVSpec {
    SVSpec::new(vec![1, 1], vec![3, 5]).unwrap()
}

fn bench_defectivity_scan(c: &mut Criterion) {
    let spec = flagship();
    let mut group = c.benchmark_group("defectivity_scan_1x1_3x5");
    group.sample_size(10);
    group.bench_function("rayon", |b| {
        b.iter(|| defectivity_scan_with(Parallelism::Rayon, &spec, 0, Mode::Exact).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| defectivity_scan_with(Parallelism::Sequential, &spec, 0, Mode::Exact).unwrap())
    });
    group.finish();
}

fn bench_falsifier_starts(c: &mut Criterion) {
    let spec = SVSpec::new(vec![1, 1], vec![1, 1]).unwrap();
    let config = SearchConfig { starts: 16, ..Default::default() };
    let mut group = c.benchmark_group("falsify_2x2_matrix_16_starts");
    group.sample_size(10);
    group.bench_function("rayon", |b| {
        b.iter(|| identifiability_evidence_with(Parallelism::Rayon, &spec, None, &config).unwrap())
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            identifiability_evidence_with(Parallelism::Sequential, &spec, None, &config).unwrap()
        })
    });
    group.finish();
}

fn bench_scan_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan_grid_3x8x3");
    group.sample_size(10);
    group.bench_function("rayon", |b| b.iter(|| scan_with(Parallelism::Rayon, 3, 8, 3)));
    group.bench_function("sequential", |b| {
        b.iter(|| scan_with(Parallelism::Sequential, 3, 8, 3))
    });
    group.finish();
}

criterion_group!(benches, bench_defectivity_scan, bench_falsifier_starts, bench_scan_grid);
criterion_main!(benches);
