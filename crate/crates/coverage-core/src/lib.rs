//! Deterministic discrete-time simulation of distributed multi-agent
//! coverage. Agents claim the targets no neighbor is closer to, share
//! per-target coverage bits with agents in communication range, and — under
//! the cut-in rule — pursue remembered-uncovered or unknown targets when
//! they own none, which lets the swarm escape the local optima the plain
//! nearest-target baseline gets stuck in. A Gaussian potential-field
//! repulsion keeps agents apart along the way.

pub mod assignment;
pub mod engine;
pub mod geom;
pub mod model;
pub mod motion;
pub mod protocol;

pub use engine::{
    generate_random_scenario, make_switching_scenario, run_campaign, run_trial, Algorithm,
    CampaignError, CampaignResult, CampaignSummary, MetricsRecord, PhaseEnd, PhaseTrigger,
    RunOptions, Scenario, ScenarioError, ScenarioSource, TrialError, TrialResult, TrialStats,
};
pub use geom::{covers, distance, Region, SensorFootprint, Vec2};
pub use model::{AgentState, ConfigError, CoverageMark, TargetSet, WorldConfig};
pub use protocol::Tier;
