//! Front end for the `ptg` binary: configuration, the subcommands, CSV/JSON
//! writers and the acceptance checks shared with the test suite.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::{CliError, ExitStatus};
