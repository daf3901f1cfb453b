//! The `spiderbm` command line: kernels, exit laws, samplers, limit laws,
//! the spectral transform and the verification suite.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod table;

use std::ffi::OsString;

use clap::{CommandFactory, Parser, Subcommand};

use crate::commands::{density, exit_time, limits, sample, spectral, verify};
use crate::error::{CliError, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "spiderbm", version, about = "Brownian motion on spider graphs", propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transition density on the infinite spider.
    Density(density::DensityCmd),
    /// Exit-time transform, density and moments of a finite spider.
    ExitTime(exit_time::ExitTimeCmd),
    /// Monte Carlo replicas of a path functional, one CSV row each.
    Sample(sample::SampleCmd),
    /// Simulated limit law against its target, as a JSON report.
    Limits(limits::LimitsCmd),
    /// Eigenmodes, transform round trip, Parseval and heat kernel.
    Spectral(spectral::SpectralCmd),
    /// Runs the acceptance suite.
    Verify(verify::VerifyCmd),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Density(_) => "density",
            Command::ExitTime(_) => "exit-time",
            Command::Sample(_) => "sample",
            Command::Limits(_) => "limits",
            Command::Spectral(_) => "spectral",
            Command::Verify(_) => "verify",
        }
    }
}

/// Runs one invocation and returns the process exit code: 0 on success, 1 on
/// a failed computation or verification, 2 on a usage error.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let name = cli.command.name();
    let outcome = match &cli.command {
        Command::Density(c) => density::run(c),
        Command::ExitTime(c) => exit_time::run(c),
        Command::Sample(c) => sample::run(c),
        Command::Limits(c) => limits::run(c),
        Command::Spectral(c) => spectral::run(c),
        Command::Verify(c) => verify::run(c),
    };
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("spiderbm {name}: {e}");
            if let CliError::Usage(_) = e {
                if let Some(sub) = Cli::command().find_subcommand_mut(name) {
                    eprintln!("\n{}", sub.render_help());
                }
            }
            e.code()
        }
    }
}
