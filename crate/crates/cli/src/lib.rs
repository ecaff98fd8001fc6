//! Scenario runner for the four-level Faraday rotation model.
//!
//! A JSON configuration selects a scenario; the runner resolves defaults,
//! writes plot-ready CSV files and a `manifest.json` describing the run.
//! Exit codes: 0 success, 1 I/O, 2 configuration, 3 regime violation,
//! 4 numerical failure.

pub mod config;
pub mod csv;
pub mod error;
pub mod manifest;
pub mod scenario;

pub use config::{parse_config, parse_override, Scenario, ScenarioConfig};
pub use error::CliError;
pub use manifest::{execute, load_for_replay, RunManifest};
