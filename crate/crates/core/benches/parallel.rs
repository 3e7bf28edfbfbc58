use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use popgraph::game::GmmRpsSpec;
use popgraph::metagame::{build_self_play_matrix, Sampling};
use popgraph::rng::SeedStreams;
use popgraph::runner::{run_sweep, ExperimentConfig, RunOptions};
use popgraph::{Execution, GameSpec, GraphKind, PolicyParams};

fn payoff_matrix(c: &mut Criterion) {
    let game = GameSpec::GmmRps(GmmRpsSpec::new(7).unwrap());
    let population: Vec<PolicyParams> = (0..32)
        .map(|i| {
            let t = i as f64 * 0.37;
            PolicyParams::new(vec![t.cos(), t.sin()]).unwrap()
        })
        .collect();
    let mut group = c.benchmark_group("self_play_matrix_32x32_mc64");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            let sampling =
                Sampling::MonteCarlo { samples: 64, exploration_stddev: 0.5, streams: SeedStreams::new(1), key: 0 };
            b.iter(|| build_self_play_matrix(&population, &game, sampling, exec).unwrap())
        });
    }
    group.finish();
}

fn seed_sweep(c: &mut Criterion) {
    let game = GameSpec::GmmRps(GmmRpsSpec::new(3).unwrap());
    let configs: Vec<ExperimentConfig> = [GraphKind::Cycle, GraphKind::RectifiedNash]
        .into_iter()
        .map(|kind| {
            let mut cfg = ExperimentConfig::new("bench", game.clone(), kind);
            cfg.total_periods = 20;
            cfg.updates_per_period = 50;
            cfg.seeds = (0..4).collect();
            cfg
        })
        .collect();
    let mut group = c.benchmark_group("seed_sweep_2x4");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| run_sweep(&configs, &RunOptions { exec, log_dir: None }).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, payoff_matrix, seed_sweep);
criterion_main!(benches);
