//! Block-mean inverse square root (an L x L eigenproblem) against the dense
//! route (a d x d eigenproblem) at growing dimension — the representation's
//! whole reason to exist — plus matvec against dense matvec.

use bma_core::{best_fit, BmaMatrix, Partition};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use smalldense::{clamped_matrix_power, DenseMatrix};
use std::hint::black_box;

fn pd_instance(d: usize, blocks: usize) -> BmaMatrix {
    let sizes = vec![d / blocks; blocks];
    let p = Partition::new(sizes).unwrap();
    let data: Vec<f64> = (0..d * d)
        .map(|i| ((i as f64) * 0.61).sin() * 0.4)
        .collect();
    let a = DenseMatrix::from_vec(d, d, data).unwrap();
    let mut spd = a.matmul(&a.transpose()).unwrap();
    for i in 0..d {
        spd.set(i, i, spd.get(i, i) + d as f64);
    }
    best_fit(&spd, &p).unwrap()
}

fn bench_inv_sqrt(c: &mut Criterion) {
    let mut group = c.benchmark_group("inv_sqrt");
    group.sample_size(10);
    for d in [64usize, 256, 1024] {
        let m = pd_instance(d, 8);
        group.bench_with_input(BenchmarkId::new("block_mean", d), &d, |bench, _| {
            bench.iter(|| black_box(m.inv_sqrt().unwrap()))
        });
        // The dense route is cubic in d; d = 1024 alone would dominate the
        // whole suite's runtime.
        if d <= 256 {
            let dense = m.expand();
            group.bench_with_input(BenchmarkId::new("dense", d), &d, |bench, _| {
                bench.iter(|| black_box(clamped_matrix_power(&dense, -0.5, 1e-12).unwrap()))
            });
        }
    }
    group.finish();
}

fn bench_matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("matvec");
    for d in [256usize, 1024] {
        let m = pd_instance(d, 8);
        let v: Vec<f64> = (0..d).map(|i| (i as f64 * 0.13).cos()).collect();
        group.bench_with_input(BenchmarkId::new("block_mean", d), &d, |bench, _| {
            bench.iter(|| black_box(m.matvec(&v).unwrap()))
        });
        let dense = m.expand();
        group.bench_with_input(BenchmarkId::new("dense", d), &d, |bench, _| {
            bench.iter(|| black_box(dense.matvec(&v).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_inv_sqrt, bench_matvec);
criterion_main!(benches);
