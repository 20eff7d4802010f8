//! Command-line front end for `loattack-core`: figure data, sweeps, Monte
//! Carlo runs and oracle checks, written as CSV or JSON.

pub mod check;
pub mod cli;
pub mod error;
pub mod figure;
pub mod grid;
pub mod output;
pub mod point;
pub mod sweep;

pub use cli::{run, Cli};
pub use error::{CliError, CliResult};
