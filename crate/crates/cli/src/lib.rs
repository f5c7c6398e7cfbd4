//! Configuration parsing and subcommands of the `homogenlab` binary.

pub mod commands;
pub mod config;

pub use commands::{cmd_audit, cmd_cell, cmd_converge, cmd_macro, cmd_micro, exit, CliError, CmdResult};
pub use config::{ConfigError, RunConfig, SCHEMA};
