//! Library surface of the screening CLI, exposed so integration tests can
//! drive the pipeline in-process.

pub mod commands;
pub mod manifest;
pub mod records;

pub use commands::{CliError, CmdOutcome};
