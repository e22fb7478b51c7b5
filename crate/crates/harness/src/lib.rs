//! Closed-loop benchmark harness for the row-following stack.
//!
//! [`run_episode`] drives the simulated robot through a scenario with the
//! perception-only pipeline (PL) or with EKF fusion (PL+EKF) and returns a
//! [`RunRecord`]. [`summarize`] turns a record into cross-track error, lane
//! width and distance-per-intervention metrics; [`compare_modes`] and
//! [`sweep`] run paired-seed ablations; [`replay()`] recomputes a logged run.

pub mod compare;
pub mod config;
pub mod episode;
pub mod metrics;
pub mod navigator;
pub mod record;
pub mod replay;

use std::path::Path;

use rowfollow_sim::{FieldSpec, SimError};
use thiserror::Error;

pub use compare::{compare_modes, run_jobs, run_jobs_with, sweep, ComparisonReport, Job, SweepReport};
pub use config::{ConfigError, Mode, RunConfig};
pub use episode::{run_episode, run_on_field, EpisodeOptions};
pub use metrics::{cte, distance_per_intervention, lane_width, summarize, Dpi, MetricsSummary};
pub use navigator::{NavError, NavOutput, Navigator};
pub use record::{RecordError, RunRecord, TickRecord, SCHEMA_VERSION};
pub use replay::{replay, replay_file, Replay, ReplayWarning};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Nav(#[from] NavError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Resolves a preset name or a scenario JSON path to `(scenario_id, spec)`.
pub fn load_scenario(name_or_path: &str) -> Result<(String, FieldSpec), HarnessError> {
    if let Some(spec) = FieldSpec::preset(name_or_path) {
        return Ok((name_or_path.to_string(), spec));
    }
    let path = Path::new(name_or_path);
    let text = std::fs::read_to_string(path)
        .map_err(|source| HarnessError::Io { path: name_or_path.to_string(), source })?;
    let spec = FieldSpec::from_json(&text)?;
    let id = path.file_stem().map_or_else(|| name_or_path.to_string(), |s| s.to_string_lossy().into_owned());
    Ok((id, spec))
}
