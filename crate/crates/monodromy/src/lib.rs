//! JSON formats, verification reports, pole-map plots and the command-line
//! front end for `monodromy-core`.
//!
//! Every command reads one JSON document, runs the corresponding numerical
//! pipeline with its mandatory checks, and produces a report. Exit codes:
//! `0` when every check passes, `2` for unreadable input, `3` for a
//! numerical or verification failure named in the report.

pub mod commands;
pub mod error;
pub mod fixtures;
pub mod json;
pub mod plot;
pub mod report;

pub use commands::{Artifact, Outcome, RunConfig};
pub use error::CliError;
