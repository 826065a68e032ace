mod config;
mod error;
mod output;
mod workflow;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;
use crate::output::{Format, OutputDir};

#[derive(Debug, Parser)]
#[command(name = "seqbelief", version, about = "Belief-process simulations and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the belief ensemble and write trajectories.
    Simulate(Common),
    /// Test whether one belief series is redundant to another.
    Redundancy(Common),
    /// Split the agent's error into bias and diffusive parts.
    Errors(Common),
    /// Price a two-state claim under the agent's and the objective beliefs.
    Scenario(Common),
}

#[derive(Debug, clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Ensemble size, overriding the config.
    #[arg(long)]
    paths: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,jsonl,json")]
    format: Vec<Format>,
}

fn run(command: Command) -> Result<(), CliError> {
    let (name, args) = match &command {
        Command::Simulate(a) => ("simulate", a),
        Command::Redundancy(a) => ("redundancy", a),
        Command::Errors(a) => ("errors", a),
        Command::Scenario(a) => ("scenario", a),
    };
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", args.config.display())))?;
    let cfg = config::parse(&text)?.resolve(args.seed, args.paths)?;
    let mut out = OutputDir::create(&args.out, &args.format)?;
    match command {
        Command::Simulate(_) => workflow::run_simulate(&cfg, &mut out)?,
        Command::Redundancy(_) => workflow::run_redundancy(&cfg, &mut out)?,
        Command::Errors(_) => workflow::run_errors(&cfg, &mut out)?,
        Command::Scenario(_) => workflow::run_scenario(&cfg, &mut out)?,
    }
    out.finish(name, &text, cfg.seed, cfg.paths)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = serde_json::to_string(&e.report()).unwrap_or_else(|_| e.to_string());
            let _ = writeln!(std::io::stderr(), "{report}");
            ExitCode::from(e.exit_code())
        }
    }
}
