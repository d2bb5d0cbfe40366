//! `ipsbell`: sweeps, oracle checks and state dumps for the twin-beam and
//! photon-subtracted Bell tests.
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid input.

mod commands;
mod output;
#[cfg(test)]
mod tests;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{bell::BellArgs, grid::GridArgs, homodyne::HomodyneArgs, oracle::OracleArgs};

#[derive(Parser, Debug)]
#[command(name = "ipsbell", version, about = "Phase-space and homodyne Bell tests for photon-subtracted twin beams")]
struct Cli {
    /// Cap the worker threads used for grid evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for output files when `--out` is not given.
    #[arg(long, global = true, env = "IPSBELL_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Displaced-parity Bell values B(J) or C(J) over (J, r), optionally maximized.
    Bell(BellArgs),
    /// Sign-binned homodyne Bell parameter S against tanh r.
    Homodyne(HomodyneArgs),
    /// Compare the closed form against the Fock-space oracle.
    OracleCheck(OracleArgs),
    /// Real-plane slice W(x1, x2) of a Wigner function.
    WignerGrid(GridArgs),
}

/// A failure carrying its exit code and a `kind: reason` line.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub kind: String,
    pub reason: String,
}

impl CliError {
    pub fn invalid(kind: &str, reason: impl Into<String>) -> Self {
        CliError {
            code: 2,
            kind: kind.to_string(),
            reason: reason.into(),
        }
    }

    pub fn check_failed(reason: impl Into<String>) -> Self {
        CliError {
            code: 1,
            kind: "check-failed".to_string(),
            reason: reason.into(),
        }
    }

    pub fn io(err: impl fmt::Display) -> Self {
        CliError::invalid("io", err.to_string())
    }
}

impl From<ipsbell::Error> for CliError {
    fn from(err: ipsbell::Error) -> Self {
        CliError::invalid(err.kind(), err.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reason = self.reason.replace('\n', " ");
        write!(f, "{}: {}", self.kind, reason)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::invalid("invalid-parameter", "--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::invalid("threads", e.to_string()))?;
    }
    match &cli.command {
        Command::Bell(args) => commands::bell::run(args, &cli.out_dir),
        Command::Homodyne(args) => commands::homodyne::run(args, &cli.out_dir),
        Command::OracleCheck(args) => commands::oracle::run(args, &cli.out_dir),
        Command::WignerGrid(args) => commands::grid::run(args, &cli.out_dir),
    }
}

/// Parse `args` (program name first) and run. Help and version requests
/// print and succeed.
fn execute<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) if err.use_stderr() => {
            let message = err.to_string();
            let reason = message.lines().next().unwrap_or_default().trim_start_matches("error: ");
            return Err(CliError::invalid("usage", reason));
        }
        Err(err) => {
            let _ = err.print();
            return Ok(());
        }
    };
    run(cli)
}

fn main() -> ExitCode {
    match execute(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.code)
        }
    }
}
