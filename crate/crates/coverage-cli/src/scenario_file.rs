//! Scenario file parsing and serialization.
//!
//! Scenario files are TOML with a `[world]` table mirroring the physical
//! parameters, a `[targets]` table selecting random-grid placement or an
//! explicit phase list, an optional `[agents]` table fixing the initial
//! deployment, and an optional `[phase_trigger]` table. See
//! `docs/scenario-format.md` for the full grammar.

use coverage_core::{
    PhaseTrigger, Region, ScenarioSource, SensorFootprint, TargetSet, Vec2, WorldConfig,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("invalid scenario {path}: {field}: {message}")]
    Invalid {
        path: PathBuf,
        field: String,
        message: String,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    world: WorldSection,
    targets: TargetsSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    agents: Option<AgentsSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_trigger: Option<TriggerSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldSection {
    n_agents: usize,
    n_targets: usize,
    region: RegionSection,
    time_step: f64,
    max_speed: f64,
    /// Defaults to `max_speed`, giving full speed beyond 1 m from the
    /// reference and linear deceleration inside.
    #[serde(skip_serializing_if = "Option::is_none")]
    k_gain: Option<f64>,
    sensor_range: SizeSection,
    communication_range: f64,
    collision_detection_distance: f64,
    collision_activation_distance: f64,
    repulsion_gain: f64,
    repulsion_scaling: f64,
    t_last: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionSection {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SizeSection {
    width: f64,
    height: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetsSection {
    mode: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    phase: Vec<PhaseSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    positions: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentsSection {
    initial_positions: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TriggerSection {
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    settle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seconds: Option<f64>,
}

fn invalid(path: &Path, field: impl Into<String>, message: impl Into<String>) -> ScenarioFileError {
    ScenarioFileError::Invalid {
        path: path.to_path_buf(),
        field: field.into(),
        message: message.into(),
    }
}

/// Parse and fully validate a scenario file.
pub fn parse_scenario_file(path: &Path) -> Result<ScenarioSource, ScenarioFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ScenarioFile = toml::from_str(&text).map_err(|source| ScenarioFileError::Parse {
        path: path.to_path_buf(),
        source: Box::new(source),
    })?;
    validate_and_convert(&file, path)
}

fn validate_and_convert(
    file: &ScenarioFile,
    path: &Path,
) -> Result<ScenarioSource, ScenarioFileError> {
    let w = &file.world;
    let check = |ok: bool, field: &str, message: &str| -> Result<(), ScenarioFileError> {
        if ok {
            Ok(())
        } else {
            Err(invalid(path, format!("world.{field}"), message))
        }
    };
    check(w.region.x_min < w.region.x_max, "region", "x_min must be < x_max")?;
    check(w.region.y_min < w.region.y_max, "region", "y_min must be < y_max")?;
    check(w.n_agents >= 1, "n_agents", "must be >= 1")?;
    check(w.n_targets >= 1, "n_targets", "must be >= 1")?;
    check(w.time_step > 0.0 && w.time_step.is_finite(), "time_step", "must be > 0")?;
    check(w.max_speed > 0.0 && w.max_speed.is_finite(), "max_speed", "must be > 0")?;
    if let Some(k) = w.k_gain {
        check(k > 0.0 && k.is_finite(), "k_gain", "must be > 0")?;
    }
    check(w.sensor_range.width > 0.0, "sensor_range.width", "must be > 0")?;
    check(w.sensor_range.height > 0.0, "sensor_range.height", "must be > 0")?;
    check(w.communication_range > 0.0, "communication_range", "must be > 0")?;
    check(
        w.collision_activation_distance > 0.0,
        "collision_activation_distance",
        "must be > 0",
    )?;
    check(w.repulsion_gain >= 0.0, "repulsion_gain", "must be >= 0")?;
    check(
        w.repulsion_scaling > 0.0 && w.repulsion_scaling <= 1.0,
        "repulsion_scaling",
        "must be in (0, 1]",
    )?;
    check(
        w.collision_detection_distance < w.collision_activation_distance,
        "collision_detection_distance",
        "must be < collision_activation_distance so repulsion engages first",
    )?;
    check(w.t_last > 0.0, "t_last", "must be > 0")?;

    let region = Region::new(w.region.x_min, w.region.x_max, w.region.y_min, w.region.y_max);
    let config = WorldConfig {
        region,
        n_agents: w.n_agents,
        n_targets: w.n_targets,
        dt: w.time_step,
        v_max: w.max_speed,
        k_gain: w.k_gain.unwrap_or(w.max_speed),
        footprint: SensorFootprint::new(w.sensor_range.width, w.sensor_range.height),
        d_c: w.communication_range,
        d_k: w.collision_activation_distance,
        k_d: w.repulsion_gain,
        k_s: w.repulsion_scaling,
        collision_distance: w.collision_detection_distance,
        t_last: w.t_last,
    };
    if let Err(e) = config.validate() {
        return Err(invalid(path, format!("world.{}", e.field), &e.message));
    }

    let initial_positions = match &file.agents {
        None => None,
        Some(agents) => {
            if agents.initial_positions.len() != config.n_agents {
                return Err(invalid(
                    path,
                    "agents.initial_positions",
                    format!(
                        "expected {} positions, found {}",
                        config.n_agents,
                        agents.initial_positions.len()
                    ),
                ));
            }
            let positions: Vec<Vec2> = agents
                .initial_positions
                .iter()
                .map(|&[x, y]| Vec2::new(x, y))
                .collect();
            for (i, &p) in positions.iter().enumerate() {
                if !p.is_finite() || !region.contains(p) {
                    return Err(invalid(
                        path,
                        format!("agents.initial_positions[{i}]"),
                        format!("({}, {}) is outside the region", p.x, p.y),
                    ));
                }
            }
            Some(positions)
        }
    };

    match file.targets.mode.as_str() {
        "random_grid" => {
            if !file.targets.phase.is_empty() {
                return Err(invalid(
                    path,
                    "targets.phase",
                    "phases are not allowed in random_grid mode",
                ));
            }
            if file.phase_trigger.is_some() {
                return Err(invalid(
                    path,
                    "phase_trigger",
                    "not applicable in random_grid mode (one phase of t_last seconds)",
                ));
            }
            let cells = coverage_core::engine::GRID_DIVISIONS.pow(2);
            if config.n_targets > cells {
                return Err(invalid(
                    path,
                    "world.n_targets",
                    format!("must be <= {cells} for random grid placement"),
                ));
            }
            Ok(ScenarioSource::RandomGrid {
                config,
                initial_positions,
            })
        }
        "phases" => {
            if file.targets.phase.is_empty() {
                return Err(invalid(path, "targets.phase", "at least one phase is required"));
            }
            let mut phases = Vec::with_capacity(file.targets.phase.len());
            for (k, phase) in file.targets.phase.iter().enumerate() {
                if phase.positions.len() != config.n_targets {
                    return Err(invalid(
                        path,
                        format!("targets.phase[{k}].positions"),
                        format!(
                            "expected {} targets, found {}",
                            config.n_targets,
                            phase.positions.len()
                        ),
                    ));
                }
                let set = TargetSet::new(
                    phase.positions.iter().map(|&[x, y]| Vec2::new(x, y)).collect(),
                );
                if let Err(e) = set.validate(&region) {
                    return Err(invalid(
                        path,
                        format!("targets.phase[{k}].positions"),
                        &e.message,
                    ));
                }
                phases.push(set);
            }
            let trigger = match &file.phase_trigger {
                None => {
                    if phases.len() > 1 {
                        PhaseTrigger::OnFullCoverage { settle: 2.0 }
                    } else {
                        PhaseTrigger::FixedDuration {
                            seconds: config.t_last,
                        }
                    }
                }
                Some(t) => match t.mode.as_str() {
                    "on_full_coverage" => {
                        let settle = t.settle.ok_or_else(|| {
                            invalid(path, "phase_trigger.settle", "required for on_full_coverage")
                        })?;
                        if t.seconds.is_some() {
                            return Err(invalid(
                                path,
                                "phase_trigger.seconds",
                                "not allowed for on_full_coverage",
                            ));
                        }
                        if !(settle > 0.0) {
                            return Err(invalid(path, "phase_trigger.settle", "must be > 0"));
                        }
                        PhaseTrigger::OnFullCoverage { settle }
                    }
                    "fixed_duration" => {
                        let seconds = t.seconds.ok_or_else(|| {
                            invalid(path, "phase_trigger.seconds", "required for fixed_duration")
                        })?;
                        if t.settle.is_some() {
                            return Err(invalid(
                                path,
                                "phase_trigger.settle",
                                "not allowed for fixed_duration",
                            ));
                        }
                        if !(seconds > 0.0) {
                            return Err(invalid(path, "phase_trigger.seconds", "must be > 0"));
                        }
                        PhaseTrigger::FixedDuration { seconds }
                    }
                    other => {
                        return Err(invalid(
                            path,
                            "phase_trigger.mode",
                            format!("unknown mode '{other}' (expected on_full_coverage|fixed_duration)"),
                        ))
                    }
                },
            };
            Ok(ScenarioSource::Phases {
                config,
                initial_positions,
                phases,
                trigger,
            })
        }
        other => Err(invalid(
            path,
            "targets.mode",
            format!("unknown mode '{other}' (expected random_grid|phases)"),
        )),
    }
}

/// Serialize a scenario back to the file format. `parse` of the result
/// reproduces the same source.
pub fn serialize_scenario(source: &ScenarioSource) -> String {
    let cfg = source.config();
    let world = WorldSection {
        n_agents: cfg.n_agents,
        n_targets: cfg.n_targets,
        region: RegionSection {
            x_min: cfg.region.x_min,
            x_max: cfg.region.x_max,
            y_min: cfg.region.y_min,
            y_max: cfg.region.y_max,
        },
        time_step: cfg.dt,
        max_speed: cfg.v_max,
        k_gain: Some(cfg.k_gain),
        sensor_range: SizeSection {
            width: cfg.footprint.width,
            height: cfg.footprint.height,
        },
        communication_range: cfg.d_c,
        collision_detection_distance: cfg.collision_distance,
        collision_activation_distance: cfg.d_k,
        repulsion_gain: cfg.k_d,
        repulsion_scaling: cfg.k_s,
        t_last: cfg.t_last,
    };
    let to_pairs = |positions: &[Vec2]| positions.iter().map(|p| [p.x, p.y]).collect();
    let file = match source {
        ScenarioSource::RandomGrid {
            initial_positions, ..
        } => ScenarioFile {
            world,
            targets: TargetsSection {
                mode: "random_grid".to_string(),
                phase: Vec::new(),
            },
            agents: initial_positions.as_ref().map(|p| AgentsSection {
                initial_positions: to_pairs(p),
            }),
            phase_trigger: None,
        },
        ScenarioSource::Phases {
            initial_positions,
            phases,
            trigger,
            ..
        } => ScenarioFile {
            world,
            targets: TargetsSection {
                mode: "phases".to_string(),
                phase: phases
                    .iter()
                    .map(|set| PhaseSection {
                        name: None,
                        positions: set.positions.iter().map(|p| [p.x, p.y]).collect(),
                    })
                    .collect(),
            },
            agents: initial_positions.as_ref().map(|p| AgentsSection {
                initial_positions: to_pairs(p),
            }),
            phase_trigger: Some(match trigger {
                PhaseTrigger::OnFullCoverage { settle } => TriggerSection {
                    mode: "on_full_coverage".to_string(),
                    settle: Some(*settle),
                    seconds: None,
                },
                PhaseTrigger::FixedDuration { seconds } => TriggerSection {
                    mode: "fixed_duration".to_string(),
                    settle: None,
                    seconds: Some(*seconds),
                },
            }),
        },
    };
    toml::to_string_pretty(&file).expect("scenario serialization cannot fail")
}
