//! Library half of the `qwalk` command-line tool: configuration files,
//! output writers and the subcommand drivers.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;

pub use error::{CliError, Result};
pub use manifest::{parse_zeta, Engine, FitWindows, RunManifest};
pub use output::{ColorScale, RunReport};
