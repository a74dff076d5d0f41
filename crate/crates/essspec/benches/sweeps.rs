//! Sequential against parallel execution for the heavy sweeps.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use essspec::builtin::{example_b, ExampleBParams};
use essspec::interval::Interval;
use essspec::options::Options;
use essspec::oracle::oracle_grid;
use essspec::par::Execution;
use essspec::regular::regular_part;
use essspec::singular::essential_spectrum;

fn modes() -> [(&'static str, Options); 2] {
    let seq = Options { execution: Execution::Sequential, ..Options::default() };
    let par = Options { execution: Execution::Parallel, ..Options::default() };
    [("sequential", seq), ("parallel", par)]
}

fn sweeps(c: &mut Criterion) {
    let (m, _) = example_b(&ExampleBParams::unit()).unwrap();
    let mut g = c.benchmark_group("example_b");
    g.sample_size(10);
    for (name, opts) in modes() {
        g.bench_with_input(BenchmarkId::new("regular_part", name), &opts, |b, o| {
            b.iter(|| regular_part(&m, o).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("oracle_grid", name), &opts, |b, o| {
            b.iter(|| oracle_grid(&m, Interval::new(-2.0, 2.0), 0.02, o).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("essential_spectrum", name), &opts, |b, o| {
            b.iter(|| essential_spectrum(&m, None, o).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
