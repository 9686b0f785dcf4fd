//! Library side of the `equimin` binary: config files and subcommands.

pub mod commands;
pub mod config;

pub use commands::{cmd_export, cmd_generate, cmd_solve, cmd_verify, exit_code, Outcome, Overrides};
pub use config::RunConfig;
