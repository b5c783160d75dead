//! The three subcommands. Each writes its documents under the configured
//! output directory and returns the exit status for the process.

use std::fs;
use std::io;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;
use superint_core::dynamics::{
    closure_detect, closure_horizon, drift_report, integrate, track_invariants, ClosureVerdict, DriftReport,
    IntegrateOptions, Trajectory,
};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};
use crate::suite::{run_suite, VerificationReport};

/// Process exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const TRUNCATED: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
    pub const CHECK_FAILED: i32 = 4;
    pub const RUNTIME: i32 = 5;
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration:\n{}", format_config_errors(.0))]
    Config(Vec<ConfigError>),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Core(#[from] superint_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => exit::CONFIG,
            _ => exit::RUNTIME,
        }
    }
}

pub fn format_config_errors(errors: &[ConfigError]) -> String {
    errors.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n")
}

fn io_err(path: &std::path::Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<(), RunError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("report serialises");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

fn csv_writer(path: &std::path::Path) -> Result<csv::Writer<fs::File>, RunError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let file = fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftEntry {
    pub max_relative: f64,
    pub rms_relative: f64,
    pub under_threshold: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationInfo {
    pub t: f64,
    pub clearance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub potential: String,
    pub scheme: &'static str,
    pub step: f64,
    pub horizon: f64,
    pub steps: usize,
    pub rows: usize,
    pub duration: f64,
    pub truncated: Option<TruncationInfo>,
    pub drift_threshold: f64,
    pub invariants_under_threshold: usize,
    pub drift: std::collections::BTreeMap<String, DriftEntry>,
    pub wall_clock_s: f64,
}

#[derive(Debug)]
pub struct SimulateOutcome {
    pub trajectory: Trajectory,
    pub drift: DriftReport,
    pub summary: SimulationSummary,
    pub exit_code: i32,
}

/// Write the trajectory with its invariant columns as CSV.
pub fn write_trajectory(path: &std::path::Path, traj: &Trajectory) -> Result<(), RunError> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "x", "y", "px", "py", "H", "J2", "ReK", "ImK"])?;
    for s in &traj.states {
        let inv = track_invariants(s, &traj.potential);
        let row = [s.t, s.x, s.y, s.px, s.py, inv.energy, inv.j2, inv.re_k, inv.im_k];
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<SimulateOutcome, RunError> {
    let pot = cfg.potential.spec();
    let start = cfg.initial_state.expect("validated").phase_state();
    let opts: IntegrateOptions = cfg.integrator.options();
    let clock = Instant::now();
    let trajectory = integrate(&start, &pot, &opts)?;
    let mut drift = drift_report(&trajectory);
    let elapsed = clock.elapsed().as_secs_f64();
    drift.wall_clock_s = Some(elapsed);

    write_trajectory(&cfg.output.path(&cfg.output.trajectory), &trajectory)?;

    let threshold = cfg.integrator.drift_threshold;
    let entries: std::collections::BTreeMap<String, DriftEntry> = drift
        .invariants
        .iter()
        .map(|d| {
            (
                d.name.to_string(),
                DriftEntry {
                    max_relative: d.max_relative,
                    rms_relative: d.rms_relative,
                    under_threshold: d.max_relative < threshold,
                },
            )
        })
        .collect();
    // H and J1 = 2H carry the same information; count the four
    // independent slots.
    let under = ["J1", "J2", "ReK", "ImK"]
        .iter()
        .filter(|n| entries.get(**n).is_some_and(|e| e.under_threshold))
        .count();
    let summary = SimulationSummary {
        potential: format!("{pot:?}"),
        scheme: trajectory.scheme.name(),
        step: opts.step,
        horizon: opts.horizon,
        steps: drift.steps,
        rows: trajectory.states.len(),
        duration: trajectory.duration(),
        truncated: trajectory.truncated.map(|t| TruncationInfo {
            t: t.t,
            clearance: t.clearance,
        }),
        drift_threshold: threshold,
        invariants_under_threshold: under,
        drift: entries,
        wall_clock_s: elapsed,
    };
    write_json(&cfg.output.path(&cfg.output.summary), &summary)?;
    let exit_code = if trajectory.truncated.is_some() {
        exit::TRUNCATED
    } else {
        exit::OK
    };
    Ok(SimulateOutcome {
        trajectory,
        drift,
        summary,
        exit_code,
    })
}

#[derive(Debug)]
pub struct VerifyOutcome {
    pub report: VerificationReport,
    pub exit_code: i32,
}

/// Run the suite and write the report. The report carries no timing, so
/// two runs with the same configuration produce identical bytes.
pub fn verify(cfg: &ExperimentConfig) -> Result<VerifyOutcome, RunError> {
    let report = run_suite(&cfg.verification);
    write_json(&cfg.output.path(&cfg.output.report), &report)?;
    let exit_code = if report.all_pass {
        exit::OK
    } else {
        exit::CHECK_FAILED
    };
    Ok(VerifyOutcome { report, exit_code })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosureDocument {
    pub potential: String,
    pub verdict: &'static str,
    pub closed: bool,
    pub period_estimate: f64,
    pub return_distance: f64,
    pub best_return_time: f64,
    pub eps: f64,
    /// Horizon the period heuristic asks for.
    pub horizon_required: f64,
    /// Length of trajectory actually searched.
    pub horizon_used: f64,
    pub radial_period: f64,
    pub truncated: Option<TruncationInfo>,
    pub orbit_points: usize,
}

#[derive(Debug)]
pub struct ClosureOutcome {
    pub document: ClosureDocument,
    pub exit_code: i32,
}

/// Integrate over the heuristic horizon (capped at `closure.max_horizon`)
/// and search for the first return within `eps`.
pub fn closure(cfg: &ExperimentConfig) -> Result<ClosureOutcome, RunError> {
    let pot = cfg.potential.spec();
    let start = cfg.initial_state.expect("validated").phase_state();
    let required = closure_horizon(&pot).unwrap_or(cfg.closure.max_horizon);
    // Overshoot slightly so the last refinement bracket fits.
    let span = (required * 1.01).min(cfg.closure.max_horizon);
    let opts = IntegrateOptions::new(cfg.integrator.step.min(span / 8.0), span, cfg.integrator.scheme.into());
    let traj = integrate(&start, &pot, &opts)?;
    let result = closure_detect(&traj, cfg.closure.eps)?;

    let orbit_path = cfg.output.path(&cfg.output.orbit);
    let mut w = csv_writer(&orbit_path)?;
    w.write_record(["x", "y"])?;
    let every = cfg.integrator.decimation.max(1);
    let mut points = 0;
    for (i, s) in traj.states.iter().enumerate() {
        if i % every == 0 || i + 1 == traj.states.len() {
            w.write_record([format!("{:e}", s.x), format!("{:e}", s.y)])?;
            points += 1;
        }
    }
    w.flush().map_err(io_err(&orbit_path))?;

    let (verdict, code) = match (result.verdict, traj.truncated) {
        (_, Some(_)) => ("truncated", exit::TRUNCATED),
        (ClosureVerdict::Closed, None) => ("closed", exit::OK),
        (ClosureVerdict::NotClosed, None) => ("not_closed", exit::OK),
        (ClosureVerdict::Inconclusive, None) => ("inconclusive", exit::INCONCLUSIVE),
    };
    let document = ClosureDocument {
        potential: format!("{pot:?}"),
        verdict,
        closed: result.closed,
        period_estimate: result.period_estimate,
        return_distance: result.return_distance,
        best_return_time: result.best_return_time,
        eps: cfg.closure.eps,
        horizon_required: result.horizon,
        horizon_used: traj.duration(),
        radial_period: result.radial_period,
        truncated: traj.truncated.map(|t| TruncationInfo {
            t: t.t,
            clearance: t.clearance,
        }),
        orbit_points: points,
    };
    write_json(&cfg.output.path(&cfg.output.closure), &document)?;
    Ok(ClosureOutcome {
        document,
        exit_code: code,
    })
}
