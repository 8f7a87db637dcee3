//! Command-line front end of `farey-spectral`: argument and config-file
//! parsing, command dispatch and lossless CSV/JSON output.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
pub use config::{parse_args, RunConfig, UsageError};

/// Parse `argv` and run; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    // help and version requests are successful runs, not usage errors
    if let Err(e) = <config::Flags as clap::Parser>::try_parse_from(&argv) {
        if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
            let _ = e.print();
            return EXIT_OK;
        }
    }
    match parse_args(argv) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("usage error: {e}");
            EXIT_USAGE
        }
    }
}
