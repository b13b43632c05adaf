//! Experiment layer over `muskat-core`: configuration files, run
//! orchestration, CSV/snapshot/manifest persistence.

pub mod config;
pub mod csvio;
pub mod manifest;
pub mod orchestrate;
pub mod snapshot;

pub use config::{ConfigError, SimConfig};
pub use manifest::RunManifest;
pub use orchestrate::{boundary_sweep, check_run, compare_depths, deep_twin, run, RunOutput};
