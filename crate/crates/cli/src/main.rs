//! `twinfringe`: simulate, fit and check two-photon interferograms.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.

mod fit;
mod scan;
mod units;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use twinfringe::lab::ScenarioName;

pub const SEED_ENV: &str = "TWINFRINGE_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "twinfringe",
    version,
    about = "Two-photon interference of temporally separated photons"
)]
struct Cli {
    /// Worker threads; 0 uses every available core. Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a scenario and write its interferogram as CSV and JSON.
    Scan(scan::ScanArgs),
    /// Fit a fringe model to an interferogram CSV.
    Fit(fit::FitArgs),
    /// Run the built-in consistency checks and print a pass/fail table.
    Validate(validate::ValidateArgs),
    /// List the canned scenarios.
    Scenarios,
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<twinfringe::Error> for Failure {
    fn from(e: twinfringe::Error) -> Self {
        if e.is_numerical() {
            Self::numerical(e.to_string())
        } else {
            Self::usage(e.to_string())
        }
    }
}

pub fn write_file(path: &PathBuf, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Seed from the environment, if set.
pub fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::usage(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::usage(format!("{SEED_ENV}: {e}"))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;
    match cli.command {
        Command::Scan(args) => scan::run(args),
        Command::Fit(args) => fit::run(args),
        Command::Validate(args) => validate::run(args),
        Command::Scenarios => {
            for name in ScenarioName::ALL {
                println!("{:<18} {}", name.as_str(), name.description());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
