//! Library surface of the command-line front end: configuration, reports,
//! the named-distribution parser, the commands and the acceptance suite.

pub mod commands;
pub mod config;
pub mod report;
pub mod selftest;
pub mod uspec;

pub use commands::CliError;
pub use config::RunConfig;
pub use report::{CheckResult, CheckStatus, RunReport};
