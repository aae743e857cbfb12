//! Sequential against parallel scheduling, for one scenario (rules fan out)
//! and for a batch of every built-in example (scenarios fan out).

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use avbc_core::catalog::ThresholdConfig;
use avbc_core::engine::{evaluate_batch, evaluate_with, Execution, RuleFilter};
use avbc_core::io::{builtin_example, Variant, EXAMPLE_NAMES};

fn bench(c: &mut Criterion) {
    let cfg = ThresholdConfig::default();
    let filter = RuleFilter::all();
    let batch: Vec<_> = EXAMPLE_NAMES
        .iter()
        .flat_map(|n| Variant::ALL.iter().map(move |&v| builtin_example(n, v).unwrap()))
        .collect();
    let single = builtin_example("slip-road", Variant::Compliant).unwrap();

    let mut g = c.benchmark_group("evaluate");
    g.sample_size(20);
    for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        g.bench_with_input(BenchmarkId::new("single", label), &exec, |b, &exec| {
            b.iter(|| evaluate_with(&single, &cfg, &filter, exec))
        });
        g.bench_with_input(BenchmarkId::new("batch", label), &exec, |b, &exec| {
            b.iter(|| evaluate_batch(&batch, &cfg, &filter, exec))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
