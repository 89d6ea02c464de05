//! Library half of the `kscale` binary: configuration and the subcommands.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

pub use config::{EpsGrid, ExpandConfig, Output, RunConfig};
pub use error::{CliError, Result};
