use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use equivbound::build_achieving_channel;
use equivbound::oracle::{bound_stress_test, min_entropy_at_max};
use equivbound_bench::{family_matrix, random_matrix, SIZES};

fn construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_achieving_channel/random");
    for n in SIZES {
        let cm = random_matrix(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &cm, |b, cm| {
            b.iter(|| build_achieving_channel(black_box(cm)).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("build_achieving_channel/family");
    for n in SIZES {
        let cm = family_matrix(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &cm, |b, cm| {
            b.iter(|| build_achieving_channel(black_box(cm)).unwrap())
        });
    }
    group.finish();
}

fn oracles(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    group.bench_function("min_entropy_at_max/n=6", |b| b.iter(|| min_entropy_at_max(black_box(0.35), 6).unwrap()));
    group.bench_function("stress/1000", |b| b.iter(|| bound_stress_test(1000, 5, 40, black_box(1)).unwrap()));
    group.finish();
}

criterion_group!(benches, construction, oracles);
criterion_main!(benches);
