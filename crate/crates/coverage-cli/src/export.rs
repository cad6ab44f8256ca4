//! CSV and summary exports. All floats are written with nine decimal
//! places so re-runs of the same seed produce byte-identical files.

use coverage_core::engine::TrajectoryRow;
use coverage_core::{Algorithm, CampaignSummary, MetricsRecord, TrialResult, WorldConfig};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

fn fmt(x: f64) -> String {
    format!("{x:.9}")
}

/// One row per agent per step: `t,agent_id,x,y,ref_target,tier`.
/// `ref_target` and `tier` are empty when the agent holds position and on
/// the trailing end-state rows.
pub fn trajectories_csv(rows: &[TrajectoryRow]) -> String {
    let mut out = String::from("t,agent_id,x,y,ref_target,tier\n");
    for row in rows {
        let ref_target = row.ref_target.map(|t| t.to_string()).unwrap_or_default();
        let tier = row.tier.map(|t| t.as_str()).unwrap_or("");
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt(row.t),
            row.agent,
            fmt(row.pos.x),
            fmt(row.pos.y),
            ref_target,
            tier
        ));
    }
    out
}

/// One row per step: `t,p_cov,p_cov_lower,min_pairwise_dist`.
pub fn metrics_csv(records: &[MetricsRecord]) -> String {
    let mut out = String::from("t,p_cov,p_cov_lower,min_pairwise_dist\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(r.t),
            fmt(r.p_cov),
            fmt(r.p_cov_lower),
            fmt(r.min_pairwise_distance)
        ));
    }
    out
}

/// Everything needed to reproduce a run: tool version, scenario, algorithm,
/// seeds, and the effective world parameters after overrides.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub scenario_path: String,
    pub algorithm: String,
    pub base_seed: u64,
    pub n_trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_override: Option<f64>,
    pub wall_clock_seconds: f64,
    pub world: WorldConfig,
}

#[derive(Debug, Serialize)]
struct SummaryFile<'a> {
    manifest: &'a RunManifest,
    summary: &'a CampaignSummary,
}

pub fn summary_toml(manifest: &RunManifest, summary: &CampaignSummary) -> String {
    toml::to_string_pretty(&SummaryFile { manifest, summary })
        .expect("summary serialization cannot fail")
}

/// Which artifacts a run writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Emit {
    Trajectories,
    Metrics,
    Summary,
}

pub fn trajectories_path(out_dir: &Path, seed: u64) -> PathBuf {
    out_dir.join(format!("trajectories_seed{seed}.csv"))
}

pub fn metrics_path(out_dir: &Path, seed: u64) -> PathBuf {
    out_dir.join(format!("metrics_seed{seed}.csv"))
}

pub fn summary_path(out_dir: &Path) -> PathBuf {
    out_dir.join("summary.toml")
}

/// Write the per-trial artifacts for one finished trial.
pub fn write_trial_files(
    out_dir: &Path,
    trial: &TrialResult,
    emit_trajectories: bool,
    emit_metrics: bool,
) -> std::io::Result<()> {
    if emit_trajectories {
        let mut f = std::fs::File::create(trajectories_path(out_dir, trial.seed))?;
        f.write_all(trajectories_csv(&trial.trajectories).as_bytes())?;
    }
    if emit_metrics {
        let mut f = std::fs::File::create(metrics_path(out_dir, trial.seed))?;
        f.write_all(metrics_csv(&trial.metrics).as_bytes())?;
    }
    Ok(())
}

pub fn algorithm_name(algorithm: Algorithm) -> &'static str {
    match algorithm {
        Algorithm::Lloyd => "lloyd",
        Algorithm::Proposed => "proposed",
    }
}
