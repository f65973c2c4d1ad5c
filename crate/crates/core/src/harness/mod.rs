//! Scenario configs, simulation runs, trace export and summary metrics.

pub mod config;
pub mod metrics;
pub mod run;
pub mod scenarios;
pub mod trace;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{ConfigError, ScenarioConfig};
pub use metrics::{Metrics, PairMetrics};
pub use run::{run_scenario, run_to_dir, scenario_metrics};
pub use trace::{Trace, TraceError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Setup(String),
    #[error("diverged at step {step}: {message}")]
    Divergence { step: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
}
