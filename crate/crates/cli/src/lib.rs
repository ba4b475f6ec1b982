//! Command-line surface for `fejer-core`.
//!
//! Exit codes: 0 success, 1 validation failure (pole check, unitarity,
//! path self-check, numerical invariants), 2 usage, I/O or parse error.

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod source;

pub use config::{parse_job_config, JobArgs, JobConfig, OutputFormat};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] fejer_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use fejer_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 1,
            CliError::Core(E::Parse(_) | E::Format { .. } | E::Io(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "fejer",
    version,
    about = "Fejér-averaged functions of unitary operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Unitarity report for the operator.
    Verify(JobArgs),
    /// Moment table <U^k x, y> for |k| <= N.
    Moments(JobArgs),
    /// (sigma_N f)(U) x as a vector.
    Apply(JobArgs),
    /// F^N_{x,y}(f) on both evaluation paths.
    Functional(JobArgs),
    /// Fejér-smoothed spectral density on a grid.
    Density(JobArgs),
    /// F^N_{x,y}(f) over an increasing list of orders.
    Convergence(JobArgs),
    /// Exact f(U)x and <f(U)x, y> from the spectral decomposition.
    Oracle(JobArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Moments(_) => "moments",
            Command::Apply(_) => "apply",
            Command::Functional(_) => "functional",
            Command::Density(_) => "density",
            Command::Convergence(_) => "convergence",
            Command::Oracle(_) => "oracle",
        }
    }

    fn args(&self) -> &JobArgs {
        match self {
            Command::Verify(a)
            | Command::Moments(a)
            | Command::Apply(a)
            | Command::Functional(a)
            | Command::Density(a)
            | Command::Convergence(a)
            | Command::Oracle(a) => a,
        }
    }
}

/// Rendered output plus an optional validation failure reported after it.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    pub failure: Option<String>,
}

impl Outcome {
    pub fn ok(text: String) -> Self {
        Outcome {
            text,
            failure: None,
        }
    }
}

/// Parses `argv` (including the program name), runs the job and writes the
/// result to `--out` or `stdout`. Diagnostics go to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    let job = match cli.command.args().resolve() {
        Ok(job) => job,
        Err(e) => return report(stderr, &e),
    };
    if let Some(c) = job.command.as_deref() {
        if c != cli.command.name() {
            log::warn!(
                "config command {c:?} overridden by subcommand {:?}",
                cli.command.name()
            );
        }
    }
    let outcome = match commands::execute(&cli.command, &job) {
        Ok(o) => o,
        Err(e) => return report(stderr, &e),
    };
    let written = match &job.out {
        Some(path) => std::fs::write(path, &outcome.text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(outcome.text.as_bytes())
            .map_err(|e| CliError::Usage(format!("stdout: {e}"))),
    };
    if let Err(e) = written {
        return report(stderr, &e);
    }
    match outcome.failure {
        Some(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        None => 0,
    }
}

fn report(stderr: &mut dyn Write, e: &CliError) -> i32 {
    let _ = writeln!(stderr, "error: {e}");
    e.exit_code()
}

/// [`run`] against the process's standard streams.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}
