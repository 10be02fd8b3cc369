use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use urllc_core::age::peak_age_pgf;
use urllc_core::channel::{arq_service_model, rcus_epsilon, DEFAULT_ALPHAS};
use urllc_core::pgf::{exact_ccdf, saddlepoint_ccdf};
use urllc_core::queueing::{delay_pgf_async, delay_pgf_sync, DEFAULT_DEGREE_CAP};
use urllc_core::sim::simulate_fcfs_delay;
use urllc_core::{AgePolicy, ChannelSpec, QueueConfig};

fn delay(c: &mut Criterion) {
    let s = arq_service_model(0.3).unwrap();
    let q = QueueConfig::new(100, 1e-3).unwrap();
    c.bench_function("delay_pgf_sync n=100", |b| b.iter(|| delay_pgf_sync(black_box(&s), &q).unwrap()));
    let g = delay_pgf_sync(&s, &q).unwrap();
    c.bench_function("exact_ccdf n=100 d=50", |b| b.iter(|| exact_ccdf(black_box(&g), 50).unwrap()));
    c.bench_function("saddlepoint_ccdf n=100 d=20", |b| {
        b.iter(|| saddlepoint_ccdf(black_box(&g), 20).unwrap())
    });
    let qa = QueueConfig::new(10, 5e-3).unwrap();
    c.bench_function("delay_pgf_async n=10", |b| {
        b.iter(|| delay_pgf_async(black_box(&s), &qa, DEFAULT_DEGREE_CAP).unwrap())
    });
}

fn age(c: &mut Criterion) {
    let s = arq_service_model(0.3).unwrap();
    let q = QueueConfig::new(10, 0.05).unwrap();
    for p in AgePolicy::ALL {
        c.bench_function(&format!("peak_age {p} ccdf a=200"), |b| {
            b.iter(|| exact_ccdf(&peak_age_pgf(p, black_box(&s), &q).unwrap(), 200).unwrap())
        });
    }
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    let spec = ChannelSpec::new(1.0, 100).unwrap();
    g.bench_function("rcus n=100 1e4 samples", |b| {
        b.iter(|| rcus_epsilon(black_box(&spec), 30, &DEFAULT_ALPHAS, 10_000, 1).unwrap())
    });
    let s = arq_service_model(0.3).unwrap();
    let q = QueueConfig::new(10, 0.01).unwrap();
    g.bench_function("fcfs sim 1e5 bulks", |b| {
        b.iter(|| simulate_fcfs_delay(black_box(&s), &q, 100_000, 1000, 1, 30).unwrap())
    });
    g.finish();
}

criterion_group!(benches, delay, age, monte_carlo);
criterion_main!(benches);
