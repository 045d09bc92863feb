//! Configuration, file output and the verification suite for the
//! pseudotoric model in `pseudotor-core`.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod report;

pub use checks::Context;
pub use config::RunConfig;
pub use error::CliError;
pub use report::{Check, VerificationReport};
