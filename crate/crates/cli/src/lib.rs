//! Command-line front end: JSON netlists and design files in, Touchstone,
//! CSV and JSON out. Failures are reported as one JSON object on stderr.

pub mod args;
pub mod commands;
pub mod diag;
pub mod params;
pub mod touchstone;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use diag::CliError;

/// Parses `args` (including the program name) and runs the command,
/// writing normal output to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            write!(out, "{}", e.render()).map_err(|e| CliError::io("<stdout>", &e))?;
            return Ok(());
        }
        Err(e) => {
            let message = e.render().to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            return Err(CliError::input(
                "invalid-arguments",
                first,
                json!({ "usage": message.trim() }),
            ));
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::input(
                "invalid-argument",
                "thread count must be at least 1",
                json!({ "threads": n }),
            ));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::input("invalid-argument", e.to_string(), json!({})))?;
    let mut buf: Vec<u8> = Vec::new();
    let result = pool.install(|| {
        let w: &mut dyn Write = &mut buf;
        match &cli.command {
            Command::Analyze(a) => commands::analyze(a, w),
            Command::Report(a) => commands::report(a, w),
            Command::DesignMatch(a) => commands::design_match(a, w),
            Command::Fom(a) => commands::fom_cmd(a, w),
            Command::Sweep(a) => commands::sweep(a, w),
        }
    });
    out.write_all(&buf).map_err(|e| CliError::io("<stdout>", &e))?;
    result
}

/// Runs the CLI against the process's stdout/stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(args, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code
        }
    }
}
