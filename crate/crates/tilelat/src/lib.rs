//! Files, IO and the command-line driver for `tilelat-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod io;
pub mod parallel;

use std::ffi::OsString;

use clap::Parser;

pub use config::{Cli, RunConfig};
pub use error::CliError;

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tilelat: {e}");
            e.exit_code()
        }
    }
}
