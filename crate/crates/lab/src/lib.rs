//! Experiment harness for the many-access channel models in `mnac-core`:
//! configuration files, seeded Monte Carlo campaigns, figure tables, CSV and
//! JSON output and a binary codebook dump. The `mnac` binary exposes all of
//! it on the command line.

pub mod codebook_io;
pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod output;
pub mod trials;

pub use config::{ExperimentConfig, Kind, Params};
pub use error::{LabError, Result};
pub use output::{Format, Table};
