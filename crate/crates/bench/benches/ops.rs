use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use lrgibbs::gibbs::{build_gibbs_mpo, PipelineOptions};
use lrgibbs::merge::{build_merge_mpo, BoundConstants, MergeOperatorSpec};
use lrgibbs::mpo::{compress, hamiltonian_mpo, multiply_compressed, CompressionPolicy};
use lrgibbs::oracle::{gibbs_dense, schatten_norm};
use lrgibbs::C64;
use lrgibbs_bench::{halves, tfim};

fn mpo_arithmetic(c: &mut Criterion) {
    let mut group = c.benchmark_group("mpo");
    for n in [4, 8, 12] {
        let h = hamiltonian_mpo(&tfim(n)).unwrap();
        group.bench_with_input(BenchmarkId::new("multiply_exact", n), &h, |b, h| {
            b.iter(|| black_box(h.multiply(h).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("multiply_lossless", n), &h, |b, h| {
            b.iter(|| black_box(multiply_compressed(h, h, CompressionPolicy::LOSSLESS).unwrap()))
        });
        let doubled = h.add(&h).unwrap();
        group.bench_with_input(BenchmarkId::new("compress_lossless", n), &doubled, |b, m| {
            b.iter(|| black_box(compress(m, CompressionPolicy::LOSSLESS)))
        });
    }
    group.finish();
}

fn merging_operator(c: &mut Criterion) {
    let mut group = c.benchmark_group("merge");
    group.sample_size(10);
    let spec = tfim(8);
    let beta0 = C64::new(BoundConstants::from_spec(&spec).unwrap().beta0_max(), 0.0);
    let (a, b) = halves(8);
    for m0 in [4, 8, 16] {
        let ms = MergeOperatorSpec::new(&spec, a, b, beta0, m0).unwrap();
        group.bench_with_input(BenchmarkId::new("build_n8", m0), &ms, |bench, ms| {
            bench.iter(|| black_box(build_merge_mpo(ms, CompressionPolicy::LOSSLESS, None).unwrap()))
        });
    }
    group.finish();
}

fn dense_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for n in [6, 8] {
        let spec = tfim(n);
        group.bench_with_input(BenchmarkId::new("gibbs_dense", n), &spec, |b, spec| {
            b.iter(|| black_box(gibbs_dense(spec, C64::new(0.5, 0.0), 1 << 12).unwrap()))
        });
        let g = gibbs_dense(&spec, C64::new(0.5, 0.0), 1 << 12).unwrap();
        group.bench_with_input(BenchmarkId::new("schatten_1", n), &g, |b, g| {
            b.iter(|| black_box(schatten_norm(g, 1.0).unwrap()))
        });
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    let options = PipelineOptions { measure: false, ..Default::default() };
    for n in [4, 6] {
        let spec = tfim(n);
        let beta = BoundConstants::from_spec(&spec).unwrap().beta0_max();
        group.bench_with_input(BenchmarkId::new("gibbs_beta0", n), &spec, |b, spec| {
            b.iter(|| black_box(build_gibbs_mpo(spec, beta, 1e-2, CompressionPolicy::None, &options).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, mpo_arithmetic, merging_operator, dense_oracle, pipeline);
criterion_main!(benches);
