//! Verification workflows behind the `qpoly` binary: state generation and
//! files, the `compute`/`verify`/`fuzz` commands, and report output.

pub mod commands;
pub mod error;
pub mod report;
pub mod spec;
pub mod statefile;

pub use commands::{cmd_compute, cmd_fuzz, cmd_verify, Measure, RunConfig};
pub use error::{CliError, CliResult};
pub use report::{FuzzReport, ReportRecord};
pub use spec::{LoadedState, StateKind};
