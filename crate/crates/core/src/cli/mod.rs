//! Command-line front end.
//!
//! Every subcommand writes its outputs plus a `manifest.json` into `--out`;
//! `rerun --manifest` repeats the run and reproduces the outputs byte for
//! byte.
//!
//! | exit | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | invalid flags or configuration (including penalty conflicts) |
//! | 2 | unreadable input, schema or ingestion error, zero-variance column |
//! | 3 | solver did not converge (outputs are still written) |
//! | 4 | degenerate penalty grid |
//! | 5 | group-effect bound undefined (λ₂ = 0) |
//! | 6 | output, serialization or manifest error |
//! | 7 | numerical failure or too many failed replicates |

mod args;
mod commands;
mod manifest;

use std::ffi::OsString;

use clap::Parser;

use crate::error::Error;

pub use args::*;
pub use commands::{execute, run_cv, run_fit, run_generate, run_group_effect, run_rerun, run_simulate, run_smooth};
pub use manifest::{sha256_file, sha256_hex, RunManifest, MANIFEST_FILE};

/// Name of the environment variable capping worker threads.
pub const THREADS_ENV: &str = "PLM_ENET_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("cannot read input: {0}")]
    Input(String),
    #[error("cannot write output: {0}")]
    Output(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::Output(_) | CliError::Manifest(_) => 6,
            CliError::Lib(e) => match e {
                Error::Config(_) | Error::Penalty(_) | Error::Plan(_) | Error::Dimension(_) => 1,
                Error::Schema(_)
                | Error::Ingestion { .. }
                | Error::DegenerateColumn(_)
                | Error::EmptyNeighborhood { .. }
                | Error::Csv(_)
                | Error::Io { .. } => 2,
                Error::DegenerateGrid(_) => 4,
                Error::BoundUndefined(_) => 5,
                Error::Json(_) => 6,
                Error::Numerical(_) | Error::ExperimentFailed { .. } => 7,
            },
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Messages go to stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("plm-enet: {e}");
            e.exit_code()
        }
    }
}

/// Thread cap from [`THREADS_ENV`], if set.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}
