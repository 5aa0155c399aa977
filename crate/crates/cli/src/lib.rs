//! Command-line surface for `lorentz-core`: configuration, run orchestration and
//! CSV/JSON outputs.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
