//! Configuration, orchestration and file output for the `irsvlc` binary.
//!
//! The binary is a thin shell over [`run::simulate`], [`run::sweep`] and
//! [`run::verify`]; everything here is usable as a library too.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use run::{simulate, sweep, verify, RunOutput, RunSummary, SweepOutput, Vary};
