//! Run orchestration for the radgraph solver: configuration files, artifact
//! formats (reports, field dumps, meshes, checkpoints), the exact-sphere
//! benchmark and convergence study, and the check-properties suite.
//!
//! Everything observable lives in plain ASCII files with documented layouts;
//! every writer here has a matching reader, and the test suites re-read what
//! they write.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod artifacts;
pub mod config;
pub mod props;
pub mod runner;
pub mod study;

use std::fmt;

/// Top-level error for the CLI layer.
#[derive(Debug)]
pub enum CliError {
    Config(config::ConfigError),
    Core(radgraph::Error),
    Io(std::io::Error),
    Msg(String),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
            CliError::Msg(m) => write!(f, "{m}"),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<radgraph::Error> for CliError {
    fn from(e: radgraph::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
