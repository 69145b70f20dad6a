use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rareweak::empirical::{self, PValueSample};
use rareweak::fdr;
use rareweak::model::{self, RwModel};
use rareweak::population;
use rareweak::sim::{self, StudyConfig};

fn population_thresholds(c: &mut Criterion) {
    let m = RwModel::new(0.01, 4.0).unwrap();
    c.bench_function("hc_maximum", |b| {
        b.iter(|| population::hc_maximum(black_box(&m)).unwrap())
    });
    c.bench_function("threshold_set", |b| {
        b.iter(|| population::threshold_set(black_box(&m), &[0.2, 0.5, 0.8]).unwrap())
    });
}

fn empirical_hc(c: &mut Criterion) {
    let m = RwModel::new(0.01, 4.0).unwrap();
    let mut group = c.benchmark_group("empirical_hc");
    for d in [1_000usize, 10_000, 100_000] {
        let z = model::sample(&m, d, 1).unwrap().z().to_vec();
        group.bench_with_input(BenchmarkId::from_parameter(d), &z, |b, z| {
            b.iter(|| {
                let s = PValueSample::from_z_scores(z).unwrap();
                empirical::hc_threshold(&s, 0.5).unwrap()
            })
        });
    }
    group.finish();
}

fn mixture_fit(c: &mut Criterion) {
    let m = RwModel::new(0.01, 4.0).unwrap();
    let z = model::sample(&m, 10_000, 2).unwrap().z().to_vec();
    c.bench_function("fit_mixture_10k", |b| {
        b.iter(|| fdr::fit_mixture(black_box(&z), fdr::DEFAULT_TOL, fdr::DEFAULT_MAX_ITER).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let cfg = StudyConfig {
        replications: 4,
        ..StudyConfig::default()
    };
    let mut group = c.benchmark_group("simulation");
    group.sample_size(10);
    group.bench_function("study_b4_d10k", |b| b.iter(|| sim::run_study(&cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, population_thresholds, empirical_hc, mixture_fit, simulation);
criterion_main!(benches);
