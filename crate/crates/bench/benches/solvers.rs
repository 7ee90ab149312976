use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use itra_bench::gaussian;
use itra_core::sparse_solvers::{ksvd, omp, solve_joint_row_sparse, AdmmConfig, Dictionary, OmpCoder};

fn bench_omp(c: &mut Criterion) {
    let dict = Dictionary::from_unnormalized(gaussian(12, 72, 1)).unwrap();
    let y = gaussian(12, 1, 2).column(0).into_owned();
    let coder = OmpCoder::new(&dict);
    let mut group = c.benchmark_group("omp");
    for sparsity in [1, 4, 8] {
        group.bench_with_input(BenchmarkId::new("gram_cached", sparsity), &sparsity, |b, &s| {
            b.iter(|| coder.encode(black_box(&y), s).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("one_shot", sparsity), &sparsity, |b, &s| {
            b.iter(|| omp(&dict, black_box(&y), s).unwrap())
        });
    }
    group.finish();
}

fn bench_admm(c: &mut Criterion) {
    let mut group = c.benchmark_group("admm");
    group.sample_size(20);
    for (frames, rest) in [(24, 0), (24, 216)] {
        let z_self = gaussian(189, frames, 3).abs();
        let z_rest = gaussian(189, rest, 4).abs();
        let cfg = AdmmConfig::default();
        group.bench_function(format!("{frames}x{rest}"), |b| {
            b.iter(|| solve_joint_row_sparse(black_box(&z_self), &z_rest, &cfg).unwrap())
        });
    }
    group.finish();
}

fn bench_ksvd(c: &mut Criterion) {
    let samples = gaussian(12, 2000, 5);
    let mut group = c.benchmark_group("ksvd");
    group.sample_size(10);
    group.bench_function("12x2000_24atoms", |b| {
        b.iter(|| ksvd(black_box(&samples), 24, 3, 10, 7).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_omp, bench_admm, bench_ksvd);
criterion_main!(benches);
