use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use pingpong_core::channel::ChannelParams;
use pingpong_core::protocol::{run_session_with, SessionConfig, SessionEngine};
use pingpong_core::Execution;

fn session(c: &mut Criterion) {
    let (fwd, bwd) = ChannelParams::default()
        .at_distance(25.0)
        .to_session_channels()
        .unwrap();
    let mut group = c.benchmark_group("session");
    for n in [10_000u64, 100_000] {
        let config = SessionConfig {
            n_trials: n,
            ..SessionConfig::default()
        };
        group.throughput(Throughput::Elements(n));
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(
                BenchmarkId::new(format!("{exec:?}"), n),
                &config,
                |b, cfg| b.iter(|| run_session_with(exec, cfg, &fwd, &bwd).unwrap()),
            );
        }
    }
    group.finish();

    c.bench_function("engine_setup", |b| {
        b.iter(|| SessionEngine::new(SessionConfig::default(), &fwd, &bwd).unwrap())
    });
}

criterion_group!(benches, session);
criterion_main!(benches);
