//! Command-line driver for the `wglab` experiments.
//!
//! Every command writes one report (CSV with `# key=value` metadata, or the
//! same content as JSON) and exits 0 on success, 1 when a check it ran did
//! not pass, and 2 on an error. Errors are printed to stderr as a single
//! JSON object.

pub mod args;
pub mod commands;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use clap::error::ErrorKind;
use clap::Parser;

pub use args::{Cli, Command, Format, LemmaName, Params, WORKERS_ENV};
pub use commands::{execute, Outcome, RunConfig};
pub use error::CliError;
pub use report::{Cell, Report};

/// Merges flags, the optional config file and the worker environment
/// variable into a [`RunConfig`].
pub fn resolve(cli: Cli, env_workers: Option<String>) -> Result<RunConfig, CliError> {
    let params = match &cli.config {
        Some(path) => cli.params.or(args::read_config_file(path)?),
        None => cli.params,
    };
    let workers = match params.workers {
        Some(w) => w,
        None => match env_workers {
            Some(s) => s.trim().parse::<usize>().map_err(|_| {
                CliError::invalid("workers-env-integer", format!("{WORKERS_ENV} must be an integer, got {s:?}"))
            })?,
            None => 1,
        },
    };
    Ok(RunConfig {
        command: cli.command,
        format: params.format.unwrap_or(Format::Csv),
        params,
        workers,
    })
}

fn emit(outcome: &Outcome, cfg: &RunConfig) -> Result<(), CliError> {
    match &cfg.params.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(format!("cannot create {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            outcome.report.write(cfg.format, &mut w)?;
            w.flush().map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            outcome.report.write(cfg.format, &mut lock)
        }
    }
}

fn report_error(e: &CliError) {
    eprintln!("{}", e.to_json());
}

/// Runs the whole program and returns the process exit code.
pub fn run<I, T>(argv: I, env_workers: Option<String>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            report_error(&CliError::invalid("command-line", e.to_string().trim().to_string()));
            return 2;
        }
    };
    let cfg = match resolve(cli, env_workers) {
        Ok(cfg) => cfg,
        Err(e) => {
            report_error(&e);
            return 2;
        }
    };
    match execute(&cfg) {
        Ok(outcome) => {
            if let Err(e) = emit(&outcome, &cfg) {
                report_error(&e);
                return 2;
            }
            match &outcome.failure {
                Some(f) => {
                    report_error(f);
                    1
                }
                None => 0,
            }
        }
        Err(e) => {
            report_error(&e);
            2
        }
    }
}
