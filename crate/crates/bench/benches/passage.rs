use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use driftlane::cluster::kmeans_1d_2;
use driftlane::ddm::{first_passage_drift, Diffusion};
use driftlane::estimation::{prepare_pairs, total_log_likelihood};
use driftlane::simulate::{generate_synthetic_pairs, simulate_paths, DriftInput, ScenarioConfig, SimConfig};
use driftlane::{Convention, DdmParams};

fn bench_first_passage(c: &mut Criterion) {
    let mut group = c.benchmark_group("first_passage");
    let d = Diffusion {
        sigma: 1.9147,
        threshold: 20.0,
        dt: 0.1,
    };
    for seconds in [10usize, 30, 60] {
        let n = seconds * 10 + 1;
        let mu: Vec<f64> = (0..n).map(|i| 0.2 + 0.1 * (i as f64 * 0.1).sin()).collect();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(seconds), &mu, |b, mu| {
            b.iter(|| first_passage_drift(black_box(10.0), mu, &d).unwrap())
        });
    }
    group.finish();
}

fn bench_likelihood(c: &mut Criterion) {
    let truth = DdmParams::reference();
    let pairs = generate_synthetic_pairs(&truth, 300, &ScenarioConfig::default(), 1)
        .unwrap()
        .pairs;
    let prepared = prepare_pairs(&pairs).unwrap();
    c.bench_function("total_log_likelihood/300_pairs", |b| {
        b.iter(|| total_log_likelihood(black_box(&prepared), &truth, Convention::Density).unwrap())
    });
}

fn bench_kmeans(c: &mut Criterion) {
    let mut group = c.benchmark_group("kmeans_1d_2");
    for n in [50usize, 1_000, 20_000] {
        // Deterministic low-discrepancy positions in two overlapping bands.
        let x: Vec<f64> = (0..n)
            .map(|i| (i as f64 * 0.618_033_988_75).fract() * 40.0 + 30.0 * (i % 2) as f64)
            .collect();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| kmeans_1d_2(x).unwrap())
        });
    }
    group.finish();
}

fn bench_monte_carlo(c: &mut Criterion) {
    let cfg = SimConfig {
        n_paths: 10_000,
        seed: 3,
        dt: 0.1,
        horizon: 60.0,
        params: DdmParams::reference(),
        crossing: Default::default(),
    };
    c.bench_function("simulate_paths/10k", |b| {
        b.iter(|| simulate_paths(10.0, DriftInput::Constant(0.2), black_box(&cfg)).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench_first_passage, bench_likelihood, bench_kmeans, bench_monte_carlo
}
criterion_main!(benches);
