//! Pipeline front end for `tempvec`: preprocessing, training, evaluation,
//! recommendation, grid search and temporal diagnostics driven by one TOML
//! config.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod grid;

pub use config::{Overrides, RunConfig};
pub use error::{CliError, Result};
