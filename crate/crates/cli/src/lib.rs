//! Manifest-driven command-line front end for `frs-core`.
//!
//! A run reads one JSON manifest, calls into the library, and writes a
//! deterministic `result.json`, a `metadata.json` with timings, and CSV
//! series where the command produces them.

pub mod check;
pub mod error;
pub mod manifest;
pub mod output;
pub mod run;

pub use error::CliError;
pub use manifest::{Command, Manifest};
pub use run::{execute, Outcome, RunOptions, RunResult};
