use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qinstrument::certify::certify_repeatable;
use qinstrument::wold::{split, wold_decompose};
use qinstrument::{build_example_family, povm, run_trajectory, Outcome, StateVector, StructuredOperator};

fn uniform(n: u32) -> Vec<f64> {
    vec![1.0 / n as f64; n as usize]
}

fn operators(c: &mut Criterion) {
    let mut group = c.benchmark_group("operators");
    for n in [2u32, 8, 32] {
        let inst = build_example_family(n, &uniform(n)).unwrap();
        let a = inst.get(Outcome(1)).unwrap().clone();
        let b = inst.get(Outcome(n)).unwrap().clone();
        group.bench_with_input(BenchmarkId::new("compose", n), &n, |bench, _| {
            bench.iter(|| black_box(&a).adjoint().compose(black_box(&b)))
        });
        let sum = povm(&inst).sum();
        group.bench_with_input(BenchmarkId::new("equals_identity", n), &n, |bench, _| {
            bench.iter(|| black_box(&sum).equals(&StructuredOperator::identity()).unwrap())
        });
    }
    group.finish();
}

fn certification(c: &mut Criterion) {
    let mut group = c.benchmark_group("certify");
    group.sample_size(20);
    for n in [2u32, 8, 32] {
        let inst = build_example_family(n, &uniform(n)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst, |bench, inst| {
            bench.iter(|| certify_repeatable(black_box(inst)).unwrap())
        });
    }
    group.finish();
}

fn decomposition(c: &mut Criterion) {
    let mut group = c.benchmark_group("wold");
    group.sample_size(20);
    for n in [2u32, 8, 32] {
        let inst = build_example_family(n, &uniform(n)).unwrap();
        let v = split(inst.get(Outcome(1)).unwrap()).unwrap().v;
        group.bench_with_input(BenchmarkId::from_parameter(n), &v, |bench, v| {
            bench.iter(|| wold_decompose(black_box(v)).unwrap())
        });
    }
    group.finish();
}

fn trajectories(c: &mut Criterion) {
    let inst = build_example_family(4, &uniform(4)).unwrap();
    let psi = StateVector::basis(0);
    c.bench_function("trajectory_100_steps", |bench| {
        bench.iter(|| run_trajectory(black_box(&inst), &psi, 100, 7).unwrap())
    });
}

criterion_group!(benches, operators, certification, decomposition, trajectories);
criterion_main!(benches);
