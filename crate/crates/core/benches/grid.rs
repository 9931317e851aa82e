use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use khinchin::corpus::{load, DEFAULT_CORPUS};
use khinchin::diagnostics::{clan_diagnose_with, ClanConfig, GridSpec};
use khinchin::family::KhinchinFamily;
use khinchin::par::Execution;
use khinchin::sampler::concentration_test_with;
use khinchin::verify::{run_suite, CheckKind, VerifyConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn clan_grid(c: &mut Criterion) {
    let mut g = c.benchmark_group("clan_diagnose");
    for src in ["partition()", "exp(z)"] {
        let f = KhinchinFamily::from_expr(src).unwrap();
        for (name, exec) in MODES {
            let cfg = ClanConfig { exec, ..ClanConfig::default() };
            g.bench_with_input(BenchmarkId::new(name, src), &f, |b, f| {
                b.iter(|| clan_diagnose_with(black_box(f), &GridSpec::Default, &cfg).unwrap())
            });
        }
    }
    g.finish();
}

fn verify_suite(c: &mut Criterion) {
    let corpus = load(&DEFAULT_CORPUS).unwrap();
    let mut g = c.benchmark_group("verify_suite");
    g.sample_size(20);
    for (name, exec) in MODES {
        let cfg = VerifyConfig { exec, ..VerifyConfig::default() };
        g.bench_function(name, |b| b.iter(|| run_suite(black_box(&corpus), &CheckKind::ALL, &cfg)));
    }
    g.finish();
}

fn concentration(c: &mut Criterion) {
    let f = KhinchinFamily::from_expr("partition()").unwrap();
    let grid = [0.9, 0.95, 0.99, 0.995, 0.999];
    let mut g = c.benchmark_group("concentration");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| concentration_test_with(black_box(&f), &grid, 0.1, 2000, 1, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, clan_grid, verify_suite, concentration);
criterion_main!(benches);
