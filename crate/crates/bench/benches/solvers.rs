use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qdopt_bench::{dense_ising, quadratic_dataset, signed_maxcut};
use qdopt_core::rng::derived_stream;
use qdopt_core::*;
use std::hint::black_box;

fn bsb(c: &mut Criterion) {
    let mut group = c.benchmark_group("bsb_step");
    for n in [100, 500, 2000] {
        let p = signed_maxcut(n, 0);
        let params = BsbParams::default();
        let state = BsbState::random(n, &mut derived_stream(0, 0));
        group.throughput(Throughput::Elements((n * n) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| bsb_step(black_box(&state), &p, &params, 0.5).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("bsb_solve");
    group.sample_size(10);
    let p = dense_ising(12, 1);
    let params = BsbParams { restarts: 32, ..BsbParams::default() };
    group.bench_function("n12_32x2000", |b| b.iter(|| bsb_solve(black_box(&p), &params).unwrap()));
    let p = signed_maxcut(500, 2);
    let params = BsbParams { steps: 1000, ..BsbParams::default() };
    group.bench_function("maxcut500_1x1000", |b| b.iter(|| bsb_solve(black_box(&p), &params).unwrap()));
    group.finish();
}

fn baselines(c: &mut Criterion) {
    let mut group = c.benchmark_group("sa");
    group.sample_size(10);
    let p = signed_maxcut(500, 2);
    let params = SaParams { sweeps: 1000, ..SaParams::default() };
    group.bench_function("maxcut500_1x1000", |b| b.iter(|| sa_solve(black_box(&p), &params).unwrap()));
    group.finish();

    let mut group = c.benchmark_group("brute_force");
    group.sample_size(10);
    for n in [12, 16, 20] {
        let p = Problem::Ising(dense_ising(n, 3));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| brute_force_ground_state(black_box(&p)).unwrap())
        });
    }
    group.finish();
}

fn surrogate(c: &mut Criterion) {
    let data = quadratic_dataset(16, 2000, 0);
    let mut group = c.benchmark_group("fm");
    group.sample_size(10);
    let fit = FitParams { epochs: 200, ..FitParams::default() };
    group.bench_function("fit_n16_k4_2000rows_200epochs", |b| b.iter(|| fm_fit(black_box(&data), 4, &fit).unwrap()));
    let model = fm_fit(&data, 4, &fit).unwrap();
    let q = &data.rows()[0];
    group.bench_function("predict_n16_k4", |b| b.iter(|| fm_predict(&model, black_box(q)).unwrap()));
    group.finish();

    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    let cfg = PipelineConfig::default();
    group.bench_function("quadratic_n16", |b| b.iter(|| optimize_property(black_box(&data), &cfg).unwrap()));
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let m = RbmModel::random(16, 8, 0.5, 0).unwrap();
    let v = BinaryVector::zeros(16);
    let mut rng = derived_stream(1, 0);
    c.bench_function("gibbs_step_16x8", |b| b.iter(|| gibbs_step(&m, black_box(&v), &mut rng).unwrap()));
    c.bench_function("rbm_sample_16x8_4chains_1000", |b| {
        b.iter(|| rbm_sample(&m, 4, 100, 1, 1000, black_box(2)).unwrap())
    });
    let p = RelaxationParams::new(8.0).unwrap();
    c.bench_function("reparam_sample", |b| b.iter(|| reparam_sample(black_box(0.7), black_box(0.6), p).unwrap()));
}

criterion_group!(benches, bsb, baselines, surrogate, sampling);
criterion_main!(benches);
