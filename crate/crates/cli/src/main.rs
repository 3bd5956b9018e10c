//! `netkernel`: reduce reaction–diffusion networks to effective kernels,
//! simulate them and recover kernels from snapshots.

mod commands;
mod manifest;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use netkernel::Error;

use commands::{DetectArgs, OracleArgs, PresetsArgs, SimulateArgs};
use source::ReduceArgs;

/// Exit codes: 1 other failures, 2 usage, 3 unreadable or invalid input,
/// 4 unsupported network structure, 5 warnings under `--strict`,
/// 6 numerical instability.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn parse(message: String) -> Self {
        CliError { code: 3, message }
    }

    pub fn other(message: String) -> Self {
        CliError { code: 1, message }
    }

    pub fn strict(warnings: &[String]) -> Self {
        CliError {
            code: 5,
            message: format!("--strict: {} warning(s): {}", warnings.len(), warnings.join("; ")),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Syntax { .. }
            | Error::InvalidSpec(_)
            | Error::UnknownPreset(_)
            | Error::Format(_)
            | Error::Domain(_)
            | Error::Grid(_)
            | Error::GridMismatch(_) => 3,
            Error::Unsupported(_) | Error::ComplexBranches { .. } | Error::AmbiguousAsymptote(_) => 4,
            Error::Unstable { .. } | Error::TimeStep { .. } => 6,
            _ => 1,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "netkernel", version, about)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "NETKERNEL_OUT", default_value = "netkernel-out")]
    pub out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Treat warnings as errors.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Print the plan as JSON and exit without computing.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the built-in networks.
    Presets(PresetsArgs),
    /// Reduce a network to its effective kernels.
    Reduce(ReduceArgs),
    /// Simulate the effective equation.
    Simulate(SimulateArgs),
    /// Simulate the full network and compare with its dispersion relation.
    Oracle(OracleArgs),
    /// Recover a kernel spectrum from two snapshots.
    Detect(DetectArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::other(e.to_string()))?;
    }
    let global = commands::Global {
        out: cli.out,
        strict: cli.strict,
        dry_run: cli.dry_run,
    };
    match cli.command {
        Command::Presets(a) => commands::presets(&a),
        Command::Reduce(a) => commands::reduce(&global, &a),
        Command::Simulate(a) => commands::simulate(&global, &a),
        Command::Oracle(a) => commands::oracle(&global, &a),
        Command::Detect(a) => commands::detect(&global, &a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
