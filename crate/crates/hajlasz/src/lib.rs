//! File formats, experiment runner and command-line interface for
//! [`hajlasz_core`].
//!
//! Set `HAJLASZ_CACHE_DIR` to reuse computed norms across runs.

pub mod cache;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod hash;
pub mod report;

pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentSpec, RunOptions};
pub use report::{Format, Report, ReportKind};
