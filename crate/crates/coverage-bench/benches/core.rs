//! Hot-path benchmarks: target assignment, one synchronous round, and a
//! short full trial at the 100-agent scale.

use coverage_core::engine::{run_round, SimState};
use coverage_core::{
    assignment, generate_random_scenario, run_trial, Algorithm, Region, SensorFootprint,
    WorldConfig,
};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn full_scale_config() -> WorldConfig {
    WorldConfig {
        region: Region::new(-10.0, 10.0, -10.0, 10.0),
        n_agents: 100,
        n_targets: 100,
        dt: 0.02,
        v_max: 5.0,
        k_gain: 5.0,
        footprint: SensorFootprint::new(1.0, 1.0),
        d_c: 10.0,
        d_k: 0.55,
        k_d: 800.0,
        k_s: 0.35,
        collision_distance: 0.3,
        t_last: 10.0,
    }
}

fn bench_assignment(c: &mut Criterion) {
    let cfg = full_scale_config();
    let scenario = generate_random_scenario(&cfg, 1).unwrap();
    let positions = scenario.initial_positions.clone();
    let targets = &scenario.phases[0];
    let neighbor_sets: Vec<_> = (0..positions.len())
        .map(|i| assignment::neighbor_set(i, &positions, cfg.d_c))
        .collect();
    c.bench_function("assign_all_100x100", |b| {
        b.iter(|| assignment::assign_all(black_box(&positions), targets, &neighbor_sets))
    });
}

fn bench_round(c: &mut Criterion) {
    let cfg = full_scale_config();
    let scenario = generate_random_scenario(&cfg, 1).unwrap();
    let targets = &scenario.phases[0];
    c.bench_function("round_100_agents", |b| {
        let mut state = SimState::new(&scenario.initial_positions, targets.len());
        b.iter(|| black_box(run_round(&mut state, targets, &cfg, Algorithm::Proposed)))
    });
}

fn bench_trial(c: &mut Criterion) {
    let mut cfg = full_scale_config();
    cfg.t_last = 1.0;
    c.bench_function("trial_100_agents_1s", |b| {
        b.iter(|| {
            let scenario = generate_random_scenario(&cfg, 1).unwrap();
            black_box(run_trial(&scenario, Algorithm::Proposed, 1, false).unwrap())
        })
    });
}

criterion_group!(benches, bench_assignment, bench_round, bench_trial);
criterion_main!(benches);
