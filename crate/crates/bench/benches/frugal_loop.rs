use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use frugal_bench::scenario;
use frugal_core::frugal::{advance, init_loop, run_loop, LoopConfig, SelectionStrategy};

fn one_step(c: &mut Criterion) {
    let (s, plan) = scenario(0);
    let fold = &plan.folds[0];
    let cfg = LoopConfig::new(fold.train.len(), SelectionStrategy::Uncertainty, true, true, 3);
    c.bench_function("loop_step_uncertainty_to_dt", |b| {
        b.iter_batched(
            || init_loop(&s, fold, &plan.test, &cfg).unwrap(),
            |mut st| advance(&mut st).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

fn whole_run(c: &mut Criterion) {
    let (s, plan) = scenario(1);
    let fold = &plan.folds[0];
    let cfg = LoopConfig::new(fold.train.len(), SelectionStrategy::Random, false, false, 3);
    let mut g = c.benchmark_group("loop_run");
    g.sample_size(10);
    g.bench_function("random_to_exhaustion", |b| b.iter(|| run_loop(&s, fold, &plan.test, &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, one_step, whole_run);
criterion_main!(benches);
