//! Command-line front end: profile files, CSV/JSON output and the `verify` checklist.

pub mod app;
pub mod catalog;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod verify;

pub use error::CliError;
