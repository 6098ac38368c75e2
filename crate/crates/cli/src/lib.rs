//! Command-line driver for the `jcurve` toolkit.
//!
//! The binary wires CSV ingestion ([`ingest`]), the library's fitting /
//! detection / simulation entry points ([`commands`]), and report rendering
//! ([`report`]) behind one `jcurve` executable. Split as a library so the
//! integration tests can drive `execute` directly where spawning the binary
//! would only add noise.
//!
//! Exit codes: 0 success, 1 usage, 2 data, 3 numerical.

pub mod commands;
pub mod error;
pub mod ingest;
pub mod report;

pub use commands::{execute, Cli, Output};
pub use error::CliError;
