//! Library backing the `fhl` binary: report formats and command logic,
//! exposed so integration tests can drive them directly.

pub mod commands;
pub mod report;

pub use report::ExperimentReport;
