//! `coverage` binary: run batches of simulation trials from a scenario
//! file and export trajectories, per-step metrics, and a run summary.
//!
//! Exit codes: 0 on success (a trial that fails to reach full coverage is
//! still data, not an error), 1 when a trial diverges numerically or an
//! output file cannot be written, 2 on bad usage or a missing or invalid
//! scenario file.

use clap::{Parser, Subcommand, ValueEnum};
use coverage_cli::{export, scenario_file};
use coverage_core::{run_campaign, Algorithm, CampaignError, RunOptions};
use export::Emit;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "coverage", version, about = "Multi-agent coverage control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more trials of a scenario and export the results.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,

    /// Control rule for unassigned agents.
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Proposed)]
    algorithm: AlgorithmArg,

    /// Seed of the first trial; trial k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Number of trials with consecutive seeds.
    #[arg(long, default_value_t = 1)]
    trials: usize,

    /// Override the scenario's per-phase duration, in seconds.
    #[arg(long)]
    duration: Option<f64>,

    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Artifacts to write; repeatable.
    #[arg(long, value_enum, num_args = 1.., default_values_t = [Emit::Metrics, Emit::Summary])]
    emit: Vec<Emit>,

    /// Run trials one at a time instead of in parallel. The results are
    /// identical either way; this only trades wall-clock time for memory.
    #[arg(long)]
    serial: bool,

    /// Suppress the per-trial progress lines.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Lloyd,
    Proposed,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Algorithm {
        match a {
            AlgorithmArg::Lloyd => Algorithm::Lloyd,
            AlgorithmArg::Proposed => Algorithm::Proposed,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match run(&args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(RunFailure { message, code }) => {
                eprintln!("error: {message}");
                code
            }
        },
    }
}

struct RunFailure {
    message: String,
    code: ExitCode,
}

fn usage_error(message: impl Into<String>) -> RunFailure {
    RunFailure {
        message: message.into(),
        code: ExitCode::from(2),
    }
}

fn runtime_error(message: impl Into<String>) -> RunFailure {
    RunFailure {
        message: message.into(),
        code: ExitCode::from(1),
    }
}

fn run(args: &RunArgs) -> Result<(), RunFailure> {
    if args.trials == 0 {
        return Err(usage_error("--trials must be >= 1"));
    }
    if let Some(d) = args.duration {
        if !(d > 0.0) || !d.is_finite() {
            return Err(usage_error("--duration must be a positive number of seconds"));
        }
    }

    let mut source = scenario_file::parse_scenario_file(&args.scenario)
        .map_err(|e| usage_error(e.to_string()))?;
    if let Some(d) = args.duration {
        source.config_mut().t_last = d;
        // A fixed-duration trigger was resolved from t_last at parse time;
        // keep it in sync so the override really lengthens the phases.
        if let coverage_core::ScenarioSource::Phases {
            trigger: coverage_core::PhaseTrigger::FixedDuration { seconds },
            ..
        } = &mut source
        {
            *seconds = d;
        }
    }
    let algorithm: Algorithm = args.algorithm.into();

    let emit_trajectories = args.emit.contains(&Emit::Trajectories);
    let emit_metrics = args.emit.contains(&Emit::Metrics);
    let emit_summary = args.emit.contains(&Emit::Summary);

    std::fs::create_dir_all(&args.out)
        .map_err(|e| runtime_error(format!("cannot create {}: {e}", args.out.display())))?;

    let options = RunOptions {
        parallel: !args.serial,
        record_trajectories: emit_trajectories,
        ..RunOptions::default()
    };

    let started = std::time::Instant::now();
    let result = run_campaign(
        &source,
        algorithm,
        args.trials,
        args.seed,
        &options,
        |trial| {
            export::write_trial_files(&args.out, trial, emit_trajectories, emit_metrics)?;
            if !args.quiet {
                let status = if trial.converged {
                    format!(
                        "full coverage at t={:.2}s",
                        trial.convergence_time.unwrap_or(f64::NAN)
                    )
                } else {
                    let p = trial.metrics.last().map(|m| m.p_cov).unwrap_or(0.0);
                    format!("incomplete, final p_cov={p:.3}")
                };
                eprintln!(
                    "seed {}: {status}, min distance {:.3}",
                    trial.seed, trial.global_min_distance
                );
            }
            Ok(())
        },
    )
    .map_err(|e| match e {
        CampaignError::Scenario(_) => usage_error(e.to_string()),
        _ => runtime_error(e.to_string()),
    })?;

    if emit_summary {
        let manifest = export::RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario_path: args.scenario.display().to_string(),
            algorithm: export::algorithm_name(algorithm).to_string(),
            base_seed: args.seed,
            n_trials: args.trials,
            duration_override: args.duration,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            world: source.config().clone(),
        };
        let text = export::summary_toml(&manifest, &result.summary);
        let path = export::summary_path(&args.out);
        std::fs::write(&path, text)
            .map_err(|e| runtime_error(format!("cannot write {}: {e}", path.display())))?;
    }

    if !args.quiet {
        eprintln!(
            "{}/{} trials reached full coverage; safe sample fraction {:.4}",
            result.summary.n_converged, result.summary.n_trials, result.summary.safe_sample_fraction
        );
    }
    Ok(())
}
