//! Command-line front end: config loading, file formats and the commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod scenarios;

pub use config::RunConfig;
pub use error::CliError;
