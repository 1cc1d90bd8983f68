//! Scenario configuration, built-in presets, the trajectory-versus-oracle
//! comparison and file output. The `opentraj` binary is a thin wrapper over
//! this module.

pub mod config;
pub mod output;
pub mod presets;
pub mod scenario;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{parse_config, ConfigError, Mode, ScenarioConfig};
pub use presets::{preset, PRESET_NAMES};
pub use scenario::{compare, run_scenario, Comparison, RunOptions, ScenarioOutcome, Verdict};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("unknown preset {0:?} (available: {list})", list = PRESET_NAMES.join(", "))]
    UnknownPreset(String),

    #[error("preset {name} is not supported: {reason}")]
    Unsupported { name: String, reason: String },

    #[error(transparent)]
    Simulation(#[from] crate::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
