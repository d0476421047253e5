//! Configuration and commands behind the `convexflow` binary.

pub mod commands;
pub mod config;

pub use config::{parse_config, RunConfig};
