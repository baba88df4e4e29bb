//! Front end for the `ginifield` binary.
//!
//! [`run_command`] parses arguments, runs one subcommand and returns the
//! process exit status: 0 on success, 2 for usage errors, 3 for data errors
//! and 4 when a numeric guard fires.

pub mod args;
pub mod commands;

use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use ginifield::{Error, ErrorClass, ReportEnvelope};

use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Environment variable capping the worker count of simulation studies.
pub const THREADS_VAR: &str = "GINIFIELD_THREADS";

pub fn exit_code(err: &Error) -> i32 {
    match err.class() {
        ErrorClass::Usage => EXIT_USAGE,
        ErrorClass::Data => EXIT_DATA,
        ErrorClass::Numeric => EXIT_NUMERIC,
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, Error> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(None);
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Error::Config(format!(
            "{THREADS_VAR} must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))
}

fn json(env: &ReportEnvelope) -> Result<Vec<u8>, Error> {
    let mut text = env.to_json()?;
    text.push('\n');
    Ok(text.into_bytes())
}

// Runs the subcommand and returns the destination and bytes of its output.
fn dispatch(cli: &Cli) -> Result<(Option<PathBuf>, Vec<u8>), Error> {
    use commands::*;
    let (path, bytes) = match &cli.command {
        Command::Gini(a) => (a.output.output.as_deref(), json(&gini(a)?)?),
        Command::Gpi(a) => (a.output.output.as_deref(), json(&gpi(a)?)?),
        Command::DeltaGini(a) => (a.output.output.as_deref(), json(&delta_gini_cmd(a)?)?),
        Command::DeltaGpi(a) => (a.output.output.as_deref(), json(&delta_gpi_cmd(a)?)?),
        Command::Ratio(a) => (a.output.output.as_deref(), json(&ratio(a)?)?),
        Command::Lorenz(a) => (a.output.as_deref(), lorenz(a)?),
        Command::Simulate(a) => (a.output.as_deref(), simulate(a)?),
        Command::Validate(a) => {
            let v = validate_cmd(a)?;
            if let (Some(p), Some(csv)) = (&a.replicates_csv, &v.replicates_csv) {
                std::fs::write(p, csv)?;
            }
            (a.output.output.as_deref(), json(&v.envelope)?)
        }
    };
    Ok((path.map(PathBuf::from), bytes))
}

/// Runs the CLI on `argv` (including the program name) and returns the exit status.
pub fn run_command<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = thread_pool()
        .and_then(|pool| match pool {
            Some(pool) => pool.install(|| dispatch(&cli)),
            None => dispatch(&cli),
        })
        .and_then(|(path, bytes)| commands::write_to(path.as_deref(), &bytes, stdout));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
