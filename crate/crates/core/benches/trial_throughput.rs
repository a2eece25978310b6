//! Rayon vs sequential throughput on the Monte-Carlo trial workloads.
//!
//! Both paths evaluate the identical per-trial closure on the identical
//! derived streams, so the benchmark isolates scheduling overhead and
//! speedup.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use icl_lab::exec::{run_trials_par, run_trials_seq};
use icl_lab::risk::learning_trial_loss;
use icl_lab::rng::StreamSeed;
use icl_lab::scenarios;

fn bench_learning_risk(c: &mut Criterion) {
    let scenario = scenarios::tetrahedron(0.25, 0.25);
    let seed = StreamSeed::new(17).domain(1);
    let mut group = c.benchmark_group("learning_risk_trials");
    for &k in &[16usize, 128] {
        let trials = 256u64;
        group.bench_with_input(BenchmarkId::new("sequential", k), &k, |b, &k| {
            b.iter(|| {
                run_trials_seq(trials, |i| {
                    learning_trial_loss(&scenario.prior, &scenario.source, k, &mut seed.stream(i))
                })
            })
        });
        group.bench_with_input(BenchmarkId::new("rayon", k), &k, |b, &k| {
            b.iter(|| {
                run_trials_par(trials, |i| {
                    learning_trial_loss(&scenario.prior, &scenario.source, k, &mut seed.stream(i))
                })
            })
        });
    }
    group.finish();
}

fn bench_importance_particles(c: &mut Criterion) {
    let scenario = scenarios::basis_setting(2);
    let (prompt, query) = icl_lab::model::sample_incontext_prompt(
        &scenario.source,
        8,
        &mut StreamSeed::new(3).rng(),
    );
    let mut group = c.benchmark_group("importance_oracle");
    group.sample_size(20);
    // The oracle itself toggles on the crate feature; benchmark the enabled
    // build against a single-thread pool to compare like for like.
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    group.bench_function("rayon", |b| {
        b.iter(|| {
            icl_lab::oracles::importance_posterior(
                &scenario.prior,
                &prompt,
                &query,
                50_000,
                StreamSeed::new(4),
            )
            .unwrap()
        })
    });
    group.bench_function("single_thread", |b| {
        b.iter(|| {
            single.install(|| {
                icl_lab::oracles::importance_posterior(
                    &scenario.prior,
                    &prompt,
                    &query,
                    50_000,
                    StreamSeed::new(4),
                )
                .unwrap()
            })
        })
    });
    group.finish();
}

criterion_group!(benches, bench_learning_risk, bench_importance_particles);
criterion_main!(benches);
