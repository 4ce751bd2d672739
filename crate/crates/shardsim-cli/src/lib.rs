//! Library behind the `shardsim` command-line tool: configuration files,
//! sweep presets, CSV/manifest/SVG emission, and report rendering. The binary
//! in `main.rs` is a thin argument-parsing shell over these modules.

pub mod chart;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod report;
pub mod runner;
