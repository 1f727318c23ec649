//! Command-line surface and benchmark harness for `qrsteg-core`.

pub mod bench;
pub mod cli;
pub mod commands;
pub mod error;
pub mod synth;

pub use cli::{run, run_from, Cli};
pub use error::{CliError, CliResult, Exit};
