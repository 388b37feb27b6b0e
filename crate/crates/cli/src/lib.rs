//! Experiment runner built on `hybspec`: configuration, the parallel grid
//! runner, CSV/JSON/SVG emitters and one module per subcommand.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod runner;
pub mod seeds;
pub mod svg;
pub mod table;

pub use error::{CliError, Result};
