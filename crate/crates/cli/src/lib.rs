//! Configuration, file formats and subcommands of the `stokes-green` driver.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod snapshot;
pub mod suites;

pub use commands::{cmd_modes, cmd_solve, cmd_sweep, cmd_verify, SolveOutcome, VerifyOutcome};
pub use config::{parse_config, RunConfig};
pub use error::{CliError, Result};
pub use snapshot::FieldSnapshot;
