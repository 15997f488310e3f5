//! File formats and command implementations behind the `gridgp` binary.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod model_file;
