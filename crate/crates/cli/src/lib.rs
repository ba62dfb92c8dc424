//! Command-line front end for the RIS-assisted PNC simulator: configuration
//! parsing, sweep execution, CSV output and SVG plots.

pub mod config;
pub mod plot;
pub mod recipes;
pub mod report;
pub mod run;

pub use config::{parse_config, ConfigError, OutputFormat, RunConfig};
pub use run::run;
