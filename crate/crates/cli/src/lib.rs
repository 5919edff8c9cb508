//! Command-line driver for `tavg-core`: configuration files, CSV exchange and
//! the experiment commands behind the `tavg` binary.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;

pub use commands::{Outcome, Session};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
