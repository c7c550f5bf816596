//! Config-driven front end for the `sparse-mcc` experiments.
//!
//! The binary is a thin wrapper around [`commands`]; everything it does is
//! also callable from Rust, which is how the acceptance suite drives it.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{RunOptions, RunReport};
pub use config::{Overrides, RawConfig};
pub use error::CliError;
