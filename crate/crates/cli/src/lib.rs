//! Command-line front end: CSV ingestion, run configuration, audits and
//! the evaluation experiments, with JSON reports and SVG plots as output.

pub mod args;
pub mod audit;
pub mod config;
pub mod dataset;
pub mod error;
pub mod report;
pub mod svg;
pub mod uri;

pub use args::{run, Cli};
pub use audit::run_audit;
pub use config::{AuditConfig, AuditSettings};
pub use dataset::load_csv;
pub use error::{CliError, CliResult};
pub use report::AuditReport;
