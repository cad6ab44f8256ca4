//! Scenario construction: random grid target placement, explicit phase
//! sequences, and seeded initial agent deployment.

use crate::geom::{distance, Vec2};
use crate::model::{TargetSet, WorldConfig};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Grid resolution used for random target placement.
pub const GRID_DIVISIONS: usize = 20;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("n_targets {n_targets} exceeds the {cells} cells of the {divisions}x{divisions} grid")]
    TooManyTargets {
        n_targets: usize,
        cells: usize,
        divisions: usize,
    },
    #[error("could not place {n_agents} agents at pairwise spacing >= {spacing} after {attempts} attempts")]
    PlacementFailed {
        n_agents: usize,
        spacing: f64,
        attempts: usize,
    },
    #[error("scenario has no target phases")]
    NoPhases,
}

/// When a multi-phase scenario advances to the next target pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PhaseTrigger {
    /// Advance after a fixed number of seconds.
    FixedDuration { seconds: f64 },
    /// Advance once full coverage has held for `settle` seconds.
    OnFullCoverage { settle: f64 },
}

/// A fully concrete simulation setup: one world, one initial deployment,
/// and an ordered list of target patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: WorldConfig,
    pub initial_positions: Vec<Vec2>,
    pub phases: Vec<TargetSet>,
    pub trigger: PhaseTrigger,
}

/// A scenario template that may still depend on the trial seed.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    /// Targets drawn per seed; initial positions fixed or drawn per seed.
    RandomGrid {
        config: WorldConfig,
        initial_positions: Option<Vec<Vec2>>,
    },
    /// Explicit target phases; initial positions are either fixed or drawn
    /// per seed.
    Phases {
        config: WorldConfig,
        initial_positions: Option<Vec<Vec2>>,
        phases: Vec<TargetSet>,
        trigger: PhaseTrigger,
    },
}

impl ScenarioSource {
    pub fn config(&self) -> &WorldConfig {
        match self {
            ScenarioSource::RandomGrid { config, .. } => config,
            ScenarioSource::Phases { config, .. } => config,
        }
    }

    pub fn config_mut(&mut self) -> &mut WorldConfig {
        match self {
            ScenarioSource::RandomGrid { config, .. } => config,
            ScenarioSource::Phases { config, .. } => config,
        }
    }

    /// Produce the concrete scenario for one trial seed.
    pub fn realize(&self, seed: u64) -> Result<Scenario, ScenarioError> {
        match self {
            ScenarioSource::RandomGrid {
                config,
                initial_positions,
            } => {
                let mut scenario = generate_random_scenario(config, seed)?;
                if let Some(fixed) = initial_positions {
                    scenario.initial_positions = fixed.clone();
                }
                Ok(scenario)
            }
            ScenarioSource::Phases {
                config,
                initial_positions,
                phases,
                trigger,
            } => {
                if phases.is_empty() {
                    return Err(ScenarioError::NoPhases);
                }
                let initial = match initial_positions {
                    Some(p) => p.clone(),
                    None => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        sample_initial_positions(&mut rng, config)?
                    }
                };
                Ok(Scenario {
                    config: config.clone(),
                    initial_positions: initial,
                    phases: phases.clone(),
                    trigger: *trigger,
                })
            }
        }
    }
}

/// Targets at the centers of distinct random grid cells, agents deployed
/// uniformly with a minimum pairwise spacing. Fully determined by the seed.
pub fn generate_random_scenario(config: &WorldConfig, seed: u64) -> Result<Scenario, ScenarioError> {
    let cells = GRID_DIVISIONS * GRID_DIVISIONS;
    if config.n_targets > cells {
        return Err(ScenarioError::TooManyTargets {
            n_targets: config.n_targets,
            cells,
            divisions: GRID_DIVISIONS,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let cell_w = config.region.width() / GRID_DIVISIONS as f64;
    let cell_h = config.region.height() / GRID_DIVISIONS as f64;
    let mut chosen = sample(&mut rng, cells, config.n_targets).into_vec();
    chosen.sort_unstable();
    let targets = TargetSet::new(
        chosen
            .into_iter()
            .map(|cell| {
                let col = cell % GRID_DIVISIONS;
                let row = cell / GRID_DIVISIONS;
                Vec2::new(
                    config.region.x_min + (col as f64 + 0.5) * cell_w,
                    config.region.y_min + (row as f64 + 0.5) * cell_h,
                )
            })
            .collect(),
    );

    let initial_positions = sample_initial_positions(&mut rng, config)?;

    Ok(Scenario {
        config: config.clone(),
        initial_positions,
        phases: vec![targets],
        trigger: PhaseTrigger::FixedDuration {
            seconds: config.t_last,
        },
    })
}

/// Rejection-sample agent positions uniformly in the region, keeping every
/// pair at least `collision_distance` apart.
pub fn sample_initial_positions(
    rng: &mut ChaCha8Rng,
    config: &WorldConfig,
) -> Result<Vec<Vec2>, ScenarioError> {
    let max_attempts = 100_000 * config.n_agents.max(1);
    let mut placed: Vec<Vec2> = Vec::with_capacity(config.n_agents);
    let mut attempts = 0usize;
    while placed.len() < config.n_agents {
        if attempts >= max_attempts {
            return Err(ScenarioError::PlacementFailed {
                n_agents: config.n_agents,
                spacing: config.collision_distance,
                attempts,
            });
        }
        attempts += 1;
        let candidate = Vec2::new(
            rng.gen_range(config.region.x_min..=config.region.x_max),
            rng.gen_range(config.region.y_min..=config.region.y_max),
        );
        if placed
            .iter()
            .all(|&p| distance(p, candidate) >= config.collision_distance)
        {
            placed.push(candidate);
        }
    }
    Ok(placed)
}

/// A scenario that cycles through explicit target patterns, advancing once
/// full coverage has held for `settle` seconds. Coverage memory is reset at
/// each switch (the engine handles the reset).
pub fn make_switching_scenario(
    config: &WorldConfig,
    phase_patterns: Vec<TargetSet>,
    initial_positions: Vec<Vec2>,
    settle: f64,
) -> Scenario {
    Scenario {
        config: config.clone(),
        initial_positions,
        phases: phase_patterns,
        trigger: PhaseTrigger::OnFullCoverage { settle },
    }
}
