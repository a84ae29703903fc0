//! `schlicht`: bounds, identity regression, sampling and tightness search.
//!
//! Exit status: 0 when every assertion holds, 1 on a mathematical assertion
//! failure, 2 on a usage or configuration error.

mod commands;
mod config;
mod format;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, RunConfig, SEED_ENV};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<schlicht::Error> for CliError {
    fn from(e: schlicht::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = RunConfig::resolve(cli, std::env::var(SEED_ENV).ok())
        .and_then(|config| commands::dispatch(&config, &mut std::io::stdout()));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
