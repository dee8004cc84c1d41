//! Command-line front end: synthetic scenes, disparity, depth, branch
//! localization and evaluation.

pub mod commands;
pub mod config;
pub mod error;
pub mod render;

pub use commands::{run, Cli};
pub use config::PipelineConfig;
pub use error::{CliError, ExitCode};
