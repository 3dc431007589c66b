//! Batch front end: algebra spec files in, JSON or CSV reports out.

pub mod args;
pub mod report;
pub mod run;
pub mod spec;

pub use args::{Cli, Command, Format};
pub use report::{Check, CommandEcho, Report, Table};
pub use run::{run, run_untimed, run_with_spec, CliError};
pub use spec::{parse_spec, parse_str, AlgebraSpec, Caps, SpecError};
