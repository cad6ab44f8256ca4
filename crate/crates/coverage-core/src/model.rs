//! Domain types: configuration, agent state, targets, coverage marks.

use crate::geom::{distance, Region, SensorFootprint, Vec2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("invalid {field}: {message}")]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl ConfigError {
    fn new(field: &'static str, message: impl Into<String>) -> Self {
        ConfigError {
            field,
            message: message.into(),
        }
    }
}

/// Immutable physics and protocol parameters for one simulated world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub region: Region,
    pub n_agents: usize,
    pub n_targets: usize,
    /// Time step in seconds.
    pub dt: f64,
    /// Maximum speed per agent, m/s.
    pub v_max: f64,
    /// Proportional gain toward the reference, 1/s.
    pub k_gain: f64,
    pub footprint: SensorFootprint,
    /// Communication radius, meters.
    pub d_c: f64,
    /// Distance at which pairwise repulsion activates, meters.
    pub d_k: f64,
    /// Repulsion gain for agents that hold an assigned target.
    pub k_d: f64,
    /// Repulsion scaling in (0, 1] for agents without an assigned target.
    pub k_s: f64,
    /// Safety threshold used by the minimum-distance metric, meters.
    pub collision_distance: f64,
    /// Horizon of one phase, seconds.
    pub t_last: f64,
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.region.x_min < self.region.x_max) {
            return Err(ConfigError::new("region", "x_min must be < x_max"));
        }
        if !(self.region.y_min < self.region.y_max) {
            return Err(ConfigError::new("region", "y_min must be < y_max"));
        }
        if self.n_agents == 0 {
            return Err(ConfigError::new("n_agents", "must be >= 1"));
        }
        if self.n_targets == 0 {
            return Err(ConfigError::new("n_targets", "must be >= 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ConfigError::new("dt", "must be > 0"));
        }
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(ConfigError::new("v_max", "must be > 0"));
        }
        if !(self.k_gain > 0.0 && self.k_gain.is_finite()) {
            return Err(ConfigError::new("k_gain", "must be > 0"));
        }
        if !(self.footprint.width > 0.0) {
            return Err(ConfigError::new("footprint.width", "must be > 0"));
        }
        if !(self.footprint.height > 0.0) {
            return Err(ConfigError::new("footprint.height", "must be > 0"));
        }
        if !(self.d_c > 0.0) {
            return Err(ConfigError::new("d_c", "must be > 0"));
        }
        if !(self.d_k > 0.0) {
            return Err(ConfigError::new("d_k", "must be > 0"));
        }
        if !(self.k_d >= 0.0) {
            return Err(ConfigError::new("k_d", "must be >= 0"));
        }
        if !(self.k_s > 0.0 && self.k_s <= 1.0) {
            return Err(ConfigError::new("k_s", "must be in (0, 1]"));
        }
        if !(self.collision_distance < self.d_k) {
            return Err(ConfigError::new(
                "collision_distance",
                "must be < d_k so repulsion activates before the safety threshold",
            ));
        }
        if !(self.t_last > 0.0) {
            return Err(ConfigError::new("t_last", "must be > 0"));
        }
        Ok(())
    }
}

/// Per-target coverage knowledge held by one agent. `Null` means the agent
/// has never received any report about the target; it is distinct from
/// `Uncovered`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverageMark {
    Null,
    Uncovered,
    Covered,
}

/// Mutable state of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub id: usize,
    pub pos: Vec2,
    /// One mark per target.
    pub memory: Vec<CoverageMark>,
    /// Target index currently pursued, if any.
    pub reference: Option<usize>,
}

impl AgentState {
    pub fn new(id: usize, pos: Vec2, n_targets: usize) -> Self {
        AgentState {
            id,
            pos,
            memory: vec![CoverageMark::Null; n_targets],
            reference: None,
        }
    }

    pub fn reset_memory(&mut self) {
        self.memory.fill(CoverageMark::Null);
        self.reference = None;
    }
}

/// Fixed target positions for one phase. Each target carries unit importance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    pub positions: Vec<Vec2>,
}

impl TargetSet {
    pub fn new(positions: Vec<Vec2>) -> Self {
        TargetSet { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn validate(&self, region: &Region) -> Result<(), ConfigError> {
        for (l, &p) in self.positions.iter().enumerate() {
            if !p.is_finite() || !region.contains(p) {
                return Err(ConfigError::new(
                    "targets",
                    format!("target {l} at ({}, {}) is outside the region", p.x, p.y),
                ));
            }
        }
        for a in 0..self.positions.len() {
            for b in (a + 1)..self.positions.len() {
                if distance(self.positions[a], self.positions[b]) == 0.0 {
                    return Err(ConfigError::new(
                        "targets",
                        format!("targets {a} and {b} coincide"),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> WorldConfig {
        WorldConfig {
            region: Region::new(-10.0, 10.0, -10.0, 10.0),
            n_agents: 4,
            n_targets: 4,
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
    fn valid_config_passes() {
        assert!(base_config().validate().is_ok());
    }

    #[test]
    fn inverted_region_names_field() {
        let mut cfg = base_config();
        cfg.region.x_min = 10.0;
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.field, "region");
    }

    #[test]
    fn collision_distance_must_stay_below_activation() {
        let mut cfg = base_config();
        cfg.collision_distance = 0.6;
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.field, "collision_distance");
    }

    #[test]
    fn coverage_mark_serde_round_trip_keeps_null_distinct() {
        for mark in [CoverageMark::Null, CoverageMark::Uncovered, CoverageMark::Covered] {
            let json = serde_json::to_string(&mark).unwrap();
            let back: CoverageMark = serde_json::from_str(&json).unwrap();
            assert_eq!(back, mark);
        }
        let null = serde_json::to_string(&CoverageMark::Null).unwrap();
        let unc = serde_json::to_string(&CoverageMark::Uncovered).unwrap();
        assert_ne!(null, unc);
    }

    #[test]
    fn target_set_rejects_out_of_region() {
        let region = Region::new(-1.0, 1.0, -1.0, 1.0);
        let ts = TargetSet::new(vec![Vec2::new(2.0, 0.0)]);
        assert!(ts.validate(&region).is_err());
    }

    #[test]
    fn target_set_rejects_duplicates() {
        let region = Region::new(-1.0, 1.0, -1.0, 1.0);
        let ts = TargetSet::new(vec![Vec2::new(0.5, 0.0), Vec2::new(0.5, 0.0)]);
        assert!(ts.validate(&region).is_err());
    }
}
