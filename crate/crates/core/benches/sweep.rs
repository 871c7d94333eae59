use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pingpong_core::channel::{distance_grid, sweep_with, ChannelParams};
use pingpong_core::Execution;

fn sweep(c: &mut Criterion) {
    let template = ChannelParams::default();
    let mut group = c.benchmark_group("sweep");
    for step in [1.0, 0.01] {
        let grid = distance_grid(0.0, 60.0, step).unwrap();
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(
                BenchmarkId::new(format!("{exec:?}"), grid.len()),
                &grid,
                |b, grid| b.iter(|| sweep_with(exec, &template, grid).unwrap()),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
