//! Parallel vs sequential timings for the three hot paths: exhaustive
//! assignment enumeration, division sampling, and the dimension ladder
//! sweep. The `default` entries respect the `parallel` feature; the
//! `sequential` entries pin the single-threaded twins.

use criterion::{criterion_group, criterion_main, Criterion};

use renyi::dimension::{self, cantor_measure, DeltaLadder, FamilyKind};
use renyi::entropy::AlphaOrder;
use renyi::family::CellFamily;
use renyi::measure::DiscreteMeasure;
use renyi::search;

fn alpha(v: f64) -> AlphaOrder {
    AlphaOrder::new(v).unwrap()
}

/// Ten atoms, four full cells: 4^10 ≈ 1.05M assignments.
fn enumeration_instance() -> (DiscreteMeasure, CellFamily) {
    let mu = DiscreteMeasure::from_weights(&[
        0.18, 0.15, 0.13, 0.12, 0.1, 0.09, 0.08, 0.07, 0.05, 0.03,
    ])
    .unwrap();
    let all: Vec<u32> = (0..10).collect();
    let q = CellFamily::from_lists(&[&all, &all, &all, &all]).unwrap();
    (mu, q)
}

fn bench_exact_enumeration(c: &mut Criterion) {
    let (mu, q) = enumeration_instance();
    let a = alpha(2.0);
    let budget = 2_000_000;
    let mut g = c.benchmark_group("exact_enumeration_1M");
    g.sample_size(10);
    g.bench_function("default", |b| {
        b.iter(|| search::classical_entropy_exact_with_budget(&mu, &q, a, budget).unwrap())
    });
    g.bench_function("sequential", |b| {
        b.iter(|| search::seq::classical_entropy_exact_with_budget(&mu, &q, a, budget).unwrap())
    });
    g.finish();
}

fn bench_division_sampling(c: &mut Criterion) {
    let mu = DiscreteMeasure::from_weights(&[0.3, 0.25, 0.2, 0.15, 0.06, 0.04]).unwrap();
    let q = CellFamily::from_lists(&[&[0, 1, 2], &[1, 2, 3], &[2, 3, 4, 5], &[0, 4, 5]]).unwrap();
    let mut g = c.benchmark_group("division_sampling_10k");
    g.bench_function("default", |b| {
        b.iter(|| search::sample_random_divisions(&mu, &q, 10_000, 9).unwrap())
    });
    g.bench_function("sequential", |b| {
        b.iter(|| search::seq::sample_random_divisions(&mu, &q, 10_000, 9).unwrap())
    });
    g.finish();
}

fn bench_dimension_ladder(c: &mut Criterion) {
    let mu = cantor_measure(10).unwrap();
    let ladder = DeltaLadder::aligned(3.0, 10, FamilyKind::Grid).unwrap();
    let a = alpha(2.0);
    let mut g = c.benchmark_group("dimension_ladder_depth10");
    g.bench_function("default", |b| {
        b.iter(|| dimension::estimate_dimension(&mu, &ladder, a).unwrap())
    });
    g.bench_function("sequential", |b| {
        b.iter(|| dimension::seq::estimate_dimension(&mu, &ladder, a).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_exact_enumeration,
    bench_division_sampling,
    bench_dimension_ladder
);
criterion_main!(benches);
