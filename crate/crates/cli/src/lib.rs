//! Command-line harness around `hesm-core`: JSON configs, CSV traces, SVG
//! plots, run reports, comparisons, parameter sweeps and FLC surfaces.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod svg;
pub mod table;

pub use config::{parse_config, Config};
pub use error::{exit, CliError};
