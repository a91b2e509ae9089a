//! Scenario runner for waveguide-coupled atomic chains: configuration,
//! named geometries, trace fits and artifact output.

pub mod config;
pub mod fit;
pub mod runner;
pub mod scenario;
pub mod summary;

pub use config::{Method, RunConfig};
pub use runner::{execute, run_member, write_artifacts, RunOutput};
pub use summary::RunSummary;
