//! The synchronous round loop, trial orchestration, and campaign statistics.
//!
//! Every round is a barrier: all agents read the same committed snapshot,
//! exchange reports, pick references, and their new positions are committed
//! together. Trials are pure functions of (scenario, algorithm, seed).

pub mod scenario;

use crate::assignment::{self, NeighborSet};
use crate::geom::{distance, Vec2};
use crate::model::{AgentState, TargetSet, WorldConfig};
use crate::motion;
use crate::protocol::{self, CoverageReport, ReferenceChoice, Tier};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub use scenario::{
    generate_random_scenario, make_switching_scenario, sample_initial_positions, PhaseTrigger,
    Scenario, ScenarioError, ScenarioSource, GRID_DIVISIONS,
};

/// Which reference-selection rule drives the agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Lloyd,
    Proposed,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Lloyd => "lloyd",
            Algorithm::Proposed => "proposed",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lloyd" => Ok(Algorithm::Lloyd),
            "proposed" => Ok(Algorithm::Proposed),
            other => Err(format!("unknown algorithm '{other}' (expected lloyd|proposed)")),
        }
    }
}

/// Per-step measurement row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub t: f64,
    pub p_cov: f64,
    pub p_cov_lower: f64,
    pub min_pairwise_distance: f64,
}

/// The information legally visible to agents during one round: the previous
/// commit of all positions and each agent's report inbox (reports from its
/// communication neighbors only).
#[derive(Debug, Clone)]
pub struct RoundSnapshot {
    pub t: f64,
    pub positions: Vec<Vec2>,
    pub neighbor_sets: Vec<NeighborSet>,
    pub reports: Vec<CoverageReport>,
}

impl RoundSnapshot {
    /// The reports agent `i` may read: one per communication neighbor,
    /// including its own.
    pub fn inbox(&self, i: usize) -> Vec<&CoverageReport> {
        self.neighbor_sets[i]
            .members
            .iter()
            .map(|&j| &self.reports[j])
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub step: u64,
    pub agents: Vec<AgentState>,
}

impl SimState {
    pub fn new(initial_positions: &[Vec2], n_targets: usize) -> Self {
        SimState {
            step: 0,
            agents: initial_positions
                .iter()
                .enumerate()
                .map(|(id, &p)| AgentState::new(id, p, n_targets))
                .collect(),
        }
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.agents.iter().map(|a| a.pos).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RoundOutput {
    /// Metrics of the snapshot the round consumed (pre-move).
    pub metrics: MetricsRecord,
    pub choices: Vec<ReferenceChoice>,
}

/// Exact minimum over all unordered agent pairs; infinite for fewer than two
/// agents.
pub fn min_pairwise_distance(positions: &[Vec2]) -> f64 {
    let mut min = f64::INFINITY;
    for a in 0..positions.len() {
        for b in (a + 1)..positions.len() {
            let d = distance(positions[a], positions[b]);
            if d < min {
                min = d;
            }
        }
    }
    min
}

/// Centralized measurement of an arbitrary state, used for phase-end and
/// trial-end records.
pub fn measure(state: &SimState, targets: &TargetSet, cfg: &WorldConfig) -> MetricsRecord {
    let positions = state.positions();
    let neighbor_sets: Vec<NeighborSet> = (0..positions.len())
        .map(|i| assignment::neighbor_set(i, &positions, cfg.d_c))
        .collect();
    let assignments = assignment::assign_all(&positions, targets, &neighbor_sets);
    let (p_cov, p_cov_lower) =
        protocol::global_coverage(&positions, targets, &cfg.footprint, &assignments);
    MetricsRecord {
        t: state.step as f64 * cfg.dt,
        p_cov,
        p_cov_lower,
        min_pairwise_distance: min_pairwise_distance(&positions),
    }
}

/// One synchronous round: neighborhoods, assignment, coverage exchange,
/// memory update, reference selection, then a Jacobi motion commit. All
/// per-agent stages read only the snapshot, never this round's writes.
pub fn run_round(
    state: &mut SimState,
    targets: &TargetSet,
    cfg: &WorldConfig,
    algorithm: Algorithm,
) -> RoundOutput {
    let n = state.agents.len();
    let t = state.step as f64 * cfg.dt;
    let positions = state.positions();

    let neighbor_sets: Vec<NeighborSet> = (0..n)
        .map(|i| assignment::neighbor_set(i, &positions, cfg.d_c))
        .collect();
    let assignments = assignment::assign_all(&positions, targets, &neighbor_sets);
    let reports: Vec<CoverageReport> = (0..n)
        .map(|j| {
            protocol::evaluate_coverage(
                j,
                &assignments[j],
                &positions,
                &neighbor_sets[j],
                targets,
                &cfg.footprint,
            )
        })
        .collect();
    let snapshot = RoundSnapshot {
        t,
        positions,
        neighbor_sets,
        reports,
    };

    for i in 0..n {
        let inbox = snapshot.inbox(i);
        protocol::update_memory(&mut state.agents[i].memory, &inbox);
    }

    let choices: Vec<ReferenceChoice> = (0..n)
        .map(|i| {
            let agent = &state.agents[i];
            match algorithm {
                Algorithm::Lloyd => {
                    protocol::select_reference_lloyd(&assignments[i], targets, agent.pos)
                }
                Algorithm::Proposed => {
                    let (v, w) = protocol::uncovered_sets(&agent.memory);
                    protocol::select_reference_proposed(&assignments[i], &v, &w, targets, agent.pos)
                }
            }
        })
        .collect();
    for (agent, choice) in state.agents.iter_mut().zip(&choices) {
        agent.reference = choice.target;
    }

    let (p_cov, p_cov_lower) =
        protocol::global_coverage(&snapshot.positions, targets, &cfg.footprint, &assignments);
    let metrics = MetricsRecord {
        t,
        p_cov,
        p_cov_lower,
        min_pairwise_distance: min_pairwise_distance(&snapshot.positions),
    };

    let new_positions: Vec<Vec2> = (0..n)
        .map(|i| {
            let reference = choices[i].target.map(|l| targets.positions[l]);
            let u = motion::attraction(snapshot.positions[i], reference, cfg.k_gain);
            let du = motion::repulsion(
                i,
                &snapshot.positions,
                !assignments[i].targets.is_empty(),
                cfg.k_d,
                cfg.k_s,
                cfg.d_k,
            );
            motion::integrate(snapshot.positions[i], u, du, cfg.dt, cfg.v_max, &cfg.region)
        })
        .collect();
    for (agent, p) in state.agents.iter_mut().zip(new_positions) {
        agent.pos = p;
    }
    state.step += 1;

    RoundOutput { metrics, choices }
}

/// One agent-step of a trajectory. Rows at round times carry the reference
/// that drove the following motion; the trailing row carries none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub agent: usize,
    pub pos: Vec2,
    pub ref_target: Option<usize>,
    pub tier: Option<Tier>,
}

/// How one phase of a trial ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEnd {
    pub phase: usize,
    pub t: f64,
    pub p_cov: f64,
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub metrics: Vec<MetricsRecord>,
    pub trajectories: Vec<TrajectoryRow>,
    pub phase_ends: Vec<PhaseEnd>,
    pub converged: bool,
    pub convergence_time: Option<f64>,
    pub global_min_distance: f64,
    pub final_positions: Vec<Vec2>,
}

#[derive(Debug, Error)]
#[error("trial seed {seed} failed at t={t}: {message}")]
pub struct TrialError {
    pub seed: u64,
    pub t: f64,
    pub message: String,
}

fn check_finite(state: &SimState, seed: u64, cfg: &WorldConfig) -> Result<(), TrialError> {
    for agent in &state.agents {
        if !agent.pos.is_finite() {
            return Err(TrialError {
                seed,
                t: state.step as f64 * cfg.dt,
                message: format!(
                    "agent {} position is not finite: ({}, {})",
                    agent.id, agent.pos.x, agent.pos.y
                ),
            });
        }
    }
    Ok(())
}

/// Run one trial through every phase of the scenario. Coverage memory and
/// references are reset at each phase switch, since marks indexed against
/// the previous target pattern would be meaningless.
pub fn run_trial(
    scenario: &Scenario,
    algorithm: Algorithm,
    seed: u64,
    record_trajectories: bool,
) -> Result<TrialResult, TrialError> {
    let cfg = &scenario.config;
    let n_targets = scenario.phases.first().map_or(0, TargetSet::len);
    let mut state = SimState::new(&scenario.initial_positions, n_targets);
    let rounds_cap = (cfg.t_last / cfg.dt).round() as u64;

    let mut metrics = Vec::new();
    let mut trajectories = Vec::new();
    let mut phase_ends = Vec::new();

    for (phase, targets) in scenario.phases.iter().enumerate() {
        if phase > 0 {
            for agent in &mut state.agents {
                agent.reset_memory();
            }
        }
        let phase_rounds = match scenario.trigger {
            PhaseTrigger::FixedDuration { seconds } => (seconds / cfg.dt).round() as u64,
            PhaseTrigger::OnFullCoverage { .. } => rounds_cap,
        };
        let mut full_streak = 0u64;
        for _ in 0..phase_rounds {
            let pre_positions = record_trajectories.then(|| state.positions());
            let out = run_round(&mut state, targets, cfg, algorithm);
            check_finite(&state, seed, cfg)?;
            if let Some(pre) = pre_positions {
                for (i, &pos) in pre.iter().enumerate() {
                    trajectories.push(TrajectoryRow {
                        t: out.metrics.t,
                        agent: i,
                        pos,
                        ref_target: out.choices[i].target,
                        tier: Some(out.choices[i].tier),
                    });
                }
            }
            metrics.push(out.metrics);
            if let PhaseTrigger::OnFullCoverage { settle } = scenario.trigger {
                if out.metrics.p_cov == 1.0 {
                    full_streak += 1;
                } else {
                    full_streak = 0;
                }
                if full_streak as f64 * cfg.dt >= settle {
                    break;
                }
            }
        }
        let end = measure(&state, targets, cfg);
        phase_ends.push(PhaseEnd {
            phase,
            t: end.t,
            p_cov: end.p_cov,
        });
        if phase + 1 == scenario.phases.len() {
            metrics.push(end);
            if record_trajectories {
                for (i, &pos) in state.positions().iter().enumerate() {
                    trajectories.push(TrajectoryRow {
                        t: end.t,
                        agent: i,
                        pos,
                        ref_target: None,
                        tier: None,
                    });
                }
            }
        }
    }

    let converged = phase_ends.iter().all(|p| p.p_cov == 1.0);
    let convergence_time = trailing_full_coverage_start(&metrics);
    let global_min_distance = metrics
        .iter()
        .map(|m| m.min_pairwise_distance)
        .fold(f64::INFINITY, f64::min);

    Ok(TrialResult {
        seed,
        algorithm,
        metrics,
        trajectories,
        phase_ends,
        converged,
        convergence_time,
        global_min_distance,
        final_positions: state.positions(),
    })
}

/// First time of the final uninterrupted run of full coverage, if the series
/// ends fully covered.
fn trailing_full_coverage_start(metrics: &[MetricsRecord]) -> Option<f64> {
    let mut start = None;
    for record in metrics.iter().rev() {
        if record.p_cov == 1.0 {
            start = Some(record.t);
        } else {
            break;
        }
    }
    start
}

/// Per-trial statistics kept in the campaign summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialStats {
    pub seed: u64,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_time: Option<f64>,
    pub global_min_distance: f64,
    /// Fraction of this trial's steps with minimum pairwise distance at or
    /// above the collision threshold.
    pub safe_fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub n_trials: usize,
    pub n_converged: usize,
    pub fraction_converged: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_time_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_time_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_time_max: Option<f64>,
    /// Fraction of all (trial, step) minimum-distance samples at or above
    /// the collision threshold.
    pub safe_sample_fraction: f64,
    pub trials: Vec<TrialStats>,
}

#[derive(Debug, Clone)]
pub struct CampaignResult {
    /// Trial results in seed order, trajectories dropped after the sink ran.
    pub trials: Vec<TrialResult>,
    pub summary: CampaignSummary,
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error(transparent)]
    Trial(#[from] TrialError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("output sink failed: {0}")]
    Sink(std::io::Error),
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Run trials of one chunk in parallel. Results are committed in seed
    /// order either way, so the output is identical.
    pub parallel: bool,
    pub record_trajectories: bool,
    pub chunk_size: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            parallel: true,
            record_trajectories: false,
            chunk_size: 8,
        }
    }
}

/// Run `n_trials` trials with seeds `base_seed..base_seed + n_trials`. The
/// sink sees each full result (including trajectories when recorded) in seed
/// order before the trajectories are dropped from the retained results.
pub fn run_campaign<F>(
    source: &ScenarioSource,
    algorithm: Algorithm,
    n_trials: usize,
    base_seed: u64,
    options: &RunOptions,
    mut sink: F,
) -> Result<CampaignResult, CampaignError>
where
    F: FnMut(&TrialResult) -> std::io::Result<()>,
{
    let seeds: Vec<u64> = (0..n_trials as u64).map(|k| base_seed + k).collect();
    let mut trials: Vec<TrialResult> = Vec::with_capacity(n_trials);

    let run_one = |&seed: &u64| -> Result<TrialResult, CampaignError> {
        let scenario = source.realize(seed)?;
        Ok(run_trial(
            &scenario,
            algorithm,
            seed,
            options.record_trajectories,
        )?)
    };

    for chunk in seeds.chunks(options.chunk_size.max(1)) {
        let results: Vec<Result<TrialResult, CampaignError>> = if options.parallel {
            chunk.par_iter().map(run_one).collect()
        } else {
            chunk.iter().map(run_one).collect()
        };
        for result in results {
            let mut trial = result?;
            sink(&trial).map_err(CampaignError::Sink)?;
            trial.trajectories = Vec::new();
            trials.push(trial);
        }
    }

    let summary = summarize(&trials, source.config());
    Ok(CampaignResult { trials, summary })
}

pub fn summarize(trials: &[TrialResult], cfg: &WorldConfig) -> CampaignSummary {
    let threshold = cfg.collision_distance;
    let mut safe = 0usize;
    let mut total = 0usize;
    let stats: Vec<TrialStats> = trials
        .iter()
        .map(|trial| {
            let n = trial.metrics.len();
            let ok = trial
                .metrics
                .iter()
                .filter(|m| m.min_pairwise_distance >= threshold)
                .count();
            safe += ok;
            total += n;
            TrialStats {
                seed: trial.seed,
                converged: trial.converged,
                convergence_time: trial.convergence_time,
                global_min_distance: trial.global_min_distance,
                safe_fraction: if n == 0 { 1.0 } else { ok as f64 / n as f64 },
            }
        })
        .collect();

    let n_converged = stats.iter().filter(|s| s.converged).count();
    let times: Vec<f64> = stats.iter().filter_map(|s| s.convergence_time).collect();
    let (t_min, t_mean, t_max) = if times.is_empty() {
        (None, None, None)
    } else {
        (
            Some(times.iter().copied().fold(f64::INFINITY, f64::min)),
            Some(times.iter().sum::<f64>() / times.len() as f64),
            Some(times.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        )
    };

    CampaignSummary {
        n_trials: trials.len(),
        n_converged,
        fraction_converged: if trials.is_empty() {
            0.0
        } else {
            n_converged as f64 / trials.len() as f64
        },
        convergence_time_min: t_min,
        convergence_time_mean: t_mean,
        convergence_time_max: t_max,
        safe_sample_fraction: if total == 0 {
            1.0
        } else {
            safe as f64 / total as f64
        },
        trials: stats,
    }
}
