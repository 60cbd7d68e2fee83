//! Configuration, sweeps and output files behind the `aqs` binary.

pub mod config;
pub mod matrix_io;
pub mod output;
pub mod run;
pub mod validate;

pub use config::{Command, ConfigFile, Format, RunConfig, Subcommand};
pub use output::{Cell, Table};
pub use run::{execute, execute_with_workers, run, CliError, Outcome};
