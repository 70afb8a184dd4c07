use std::hint::black_box;

use birthflow_bench::reference;
use birthflow_core::{
    build_distance_table, choose_truncation, invert_cf, solve_autonomous, AutonomousCf,
    OdeConfig, SimConfig, SystemBase, DEFAULT_TAIL_TOL,
};
use criterion::{criterion_group, criterion_main, Criterion};

fn inversion(c: &mut Criterion) {
    let p = reference(1.9);
    let config = choose_truncation(&p, 1.0, DEFAULT_TAIL_TOL);
    c.bench_function("invert_cf autonomous b=1.9 t=1", |b| {
        b.iter(|| invert_cf(&AutonomousCf(p), black_box(1.0), &config).unwrap())
    });
}

fn table(c: &mut Criterion) {
    let base = SystemBase { mu: 1.0, n0: 15 };
    let bs = [0.8, 1.2, 1.5, 1.6, 1.7, 1.8, 1.9];
    let ts = [0.1, 0.2, 0.4, 0.6, 0.8, 1.0];
    c.bench_function("distance table 7x6", |b| {
        b.iter(|| build_distance_table(&base, &bs, &ts, DEFAULT_TAIL_TOL).unwrap())
    });
}

fn ode(c: &mut Criterion) {
    let p = reference(1.5);
    let config = OdeConfig::default_for(&p, 150, DEFAULT_TAIL_TOL);
    c.bench_function("rk4 autonomous b=1.5 t=0.6", |b| {
        b.iter(|| solve_autonomous(&p, black_box(0.6), &config).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let p = reference(1.5);
    let config = SimConfig::new(10_000, 7);
    let mut group = c.benchmark_group("simulation");
    group.sample_size(10);
    group.bench_function("autonomous 1e4 reps b=1.5 t=0.6", |b| {
        b.iter(|| birthflow_core::simulate_autonomous(&p, 0.6, &config).unwrap())
    });
    group.bench_function("mtminf 1e4 reps b=1.5 t=0.6", |b| {
        b.iter(|| birthflow_core::simulate_mtminf(&p, 0.6, &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, inversion, table, ode, simulation);
criterion_main!(benches);
