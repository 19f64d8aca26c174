//! `tradeability`: prices, premiums, boundaries, factor tables and figure sweeps.
//!
//! Exit codes: 0 on success, 2 for invalid input, 1 for numerical failures
//! and failed verification checks. Errors go to standard error as JSON.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use env_logger::Env;

use commands::{FigureArgs, Style, TableArgs, VerifyArgs};
use config::{CommonArgs, ScenarioArgs};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "tradeability", version, about = "Tradeability premiums of real options on illiquid projects")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scaled and unscaled option price at `x = E0`.
    Price {
        #[arg(value_enum)]
        style: Style,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Tradeability premium and illiquidity factor.
    Premium {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Optimal exercise boundary.
    Boundary {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Illiquidity factor table on the published grid.
    Table(TableArgs),
    /// Deterministic and exponential-horizon factors along a sweep.
    Figure(FigureArgs),
    /// Monte Carlo checks of the analytic and grid prices.
    Verify(VerifyArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (cfg, settings) = config::load(&cli.common)?;
    if let Some(n) = settings.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Price { style, scenario } => commands::price(*style, scenario, &cfg, &settings),
        Command::Premium { scenario } => commands::premium(scenario, &cfg, &settings),
        Command::Boundary { scenario } => commands::boundary(scenario, &cfg, &settings),
        Command::Table(args) => commands::table(args, &settings),
        Command::Figure(args) => commands::figure(args, &cfg, &settings),
        Command::Verify(args) => commands::verify(args, &cfg, &settings),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(Env::new().filter_or("TRADEABILITY_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
