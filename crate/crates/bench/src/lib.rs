//! Criterion benchmarks for the exact engine, the reliability enumeration,
//! the power series products and the simulators.

use std::hint::black_box;

use arrival_core::bounds::reliability_polynomial;
use arrival_core::engine::{arrival_pmf, build_state_space, expected_arrival, DEFAULT_MAX_STATES};
use arrival_core::graph::families;
use arrival_core::montecarlo::{sample_geometric_sp, simulate_spread, SimConfig};
use arrival_core::scalar::ratio;
use arrival_core::series::{hadamard, hadamard_geometric_closed, r_geometric};
use arrival_core::BigRational;
use criterion::{BenchmarkId, Criterion};

pub fn engine(c: &mut Criterion) {
    let mut group = c.benchmark_group("engine");
    for n in [6, 8, 10] {
        let g = families::complete(n, &ratio(1, 2));
        group.bench_with_input(BenchmarkId::new("expected_rational_Kn", n), &g, |b, g| {
            b.iter(|| {
                let space = build_state_space::<BigRational>(g, &g.singleton(0), n - 1, DEFAULT_MAX_STATES).unwrap();
                black_box(expected_arrival(&space).value)
            })
        });
        group.bench_with_input(BenchmarkId::new("expected_float_Kn", n), &g, |b, g| {
            b.iter(|| {
                let space = build_state_space::<f64>(g, &g.singleton(0), n - 1, DEFAULT_MAX_STATES).unwrap();
                black_box(expected_arrival(&space).value)
            })
        });
    }
    let c12 = families::cycle(12, &ratio(1, 3));
    let space = build_state_space::<f64>(&c12, &c12.singleton(0), 6, DEFAULT_MAX_STATES).unwrap();
    group.bench_function("pmf_float_C12_n200", |b| b.iter(|| black_box(arrival_pmf(&space, 200))));
    group.finish();
}

pub fn reliability(c: &mut Criterion) {
    let mut group = c.benchmark_group("reliability");
    group.sample_size(10);
    for n in [5, 6] {
        let g = families::complete(n, &ratio(1, 2));
        group.bench_with_input(BenchmarkId::new("Kn", n), &g, |b, g| {
            b.iter(|| black_box(reliability_polynomial(g, 0, n - 1).unwrap()))
        });
    }
    group.finish();
}

pub fn series(c: &mut Criterion) {
    let mut group = c.benchmark_group("hadamard");
    let (a, b_) = (ratio(2, 3), ratio(3, 7));
    group.bench_function("closed_m5_n4_deg50", |b| {
        b.iter(|| black_box(hadamard_geometric_closed(5, 4, &a, &b_, 50).unwrap()))
    });
    group.bench_function("brute_m5_n4_deg50", |b| {
        b.iter(|| black_box(hadamard(&r_geometric(5, &a, 50), &r_geometric(4, &b_, 50)).unwrap()))
    });
    group.finish();
}

pub fn montecarlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("montecarlo");
    group.sample_size(10);
    let g = families::cycle(8, &ratio(1, 2));
    let cfg = SimConfig::new(1, 8, 10_000).unwrap();
    group.bench_function("spread_C8_80k", |b| b.iter(|| black_box(simulate_spread(&g, 0, 4, &cfg).unwrap())));
    group.bench_function("geometric_C8_80k", |b| b.iter(|| black_box(sample_geometric_sp(&g, 0, 4, &cfg).unwrap())));
    group.finish();
}

pub fn benchmarks(c: &mut Criterion) {
    engine(c);
    reliability(c);
    series(c);
    montecarlo(c);
}
