//! Full-size trial checks: convergence behavior at the 100-agent scale and
//! bit-exact determinism across parallel and serial campaign execution.

use coverage_core::{
    generate_random_scenario, run_campaign, run_trial, Algorithm, Region, RunOptions,
    ScenarioSource, SensorFootprint, WorldConfig,
};

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

#[test]
fn full_size_trial_converges_with_cut_in() {
    let cfg = full_scale_config();
    let start = std::time::Instant::now();
    for seed in [1u64, 2, 3] {
        let scenario = generate_random_scenario(&cfg, seed).unwrap();
        let trial = run_trial(&scenario, Algorithm::Proposed, seed, false).unwrap();
        assert!(
            trial.converged,
            "seed {seed}: final p_cov = {}",
            trial.metrics.last().unwrap().p_cov
        );
    }
    eprintln!("3 full-size trials took {:?}", start.elapsed());
}

#[test]
fn full_size_campaign_is_deterministic_across_parallelism() {
    let cfg = full_scale_config();
    let source = ScenarioSource::RandomGrid { config: cfg, initial_positions: None };
    let parallel = RunOptions {
        parallel: true,
        record_trajectories: true,
        chunk_size: 4,
    };
    let serial = RunOptions {
        parallel: false,
        ..parallel.clone()
    };
    let mut digests_a = Vec::new();
    let mut digests_b = Vec::new();
    run_campaign(&source, Algorithm::Proposed, 4, 50, &parallel, |trial| {
        digests_a.push((trial.metrics.clone(), trial.trajectories.clone()));
        Ok(())
    })
    .unwrap();
    run_campaign(&source, Algorithm::Proposed, 4, 50, &serial, |trial| {
        digests_b.push((trial.metrics.clone(), trial.trajectories.clone()));
        Ok(())
    })
    .unwrap();
    assert_eq!(digests_a, digests_b);
}
