//! Command-line front end: `parisian <command> --config run.toml`.
//!
//! Exit codes: 0 on success, 2 when the config is invalid, 1 when a
//! numerical step fails or a verification does not pass.

pub mod commands;
pub mod config;
pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use commands::{Body, CliError, Outcome};
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "parisian",
    version,
    about = "Dividend barriers and Parisian ruin for Lévy risk models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ConfigArg {
    /// TOML run configuration.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Barrier-strategy value under Parisian ruin on a grid.
    ValueRuinDelay(ConfigArg),
    /// Optimal dividend barrier under Parisian ruin.
    OptimalBarrier(ConfigArg),
    /// Parisian and classical ruin probabilities on a grid.
    RuinProb(ConfigArg),
    /// Barrier-strategy value with delayed dividend payments on a grid.
    ValuePaymentDelay(ConfigArg),
    /// Monte Carlo estimate for one starting point.
    Simulate(ConfigArg),
    /// Check the HJB variational inequalities for a barrier.
    Verify(ConfigArg),
}

impl Command {
    fn config_path(&self) -> &Path {
        match self {
            Command::ValueRuinDelay(c)
            | Command::OptimalBarrier(c)
            | Command::RuinProb(c)
            | Command::ValuePaymentDelay(c)
            | Command::Simulate(c)
            | Command::Verify(c) => &c.config,
        }
    }
}

/// Runs the command against a parsed config without touching the filesystem.
pub fn execute(command: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::ValueRuinDelay(_) => commands::value_ruin_delay(cfg),
        Command::OptimalBarrier(_) => commands::optimal_barrier_cmd(cfg),
        Command::RuinProb(_) => commands::ruin_prob(cfg),
        Command::ValuePaymentDelay(_) => commands::value_payment_delay(cfg),
        Command::Simulate(_) => commands::simulate(cfg),
        Command::Verify(_) => commands::verify(cfg),
    }
}

/// Parses the config, runs the command, writes its output and returns the
/// process exit code.
pub fn run(cli: &Cli) -> i32 {
    match run_inner(cli) {
        Ok(None) => 0,
        Ok(Some(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(cli: &Cli) -> Result<Option<String>, CliError> {
    let cfg = RunConfig::from_path(cli.command.config_path())?;
    let outcome = execute(&cli.command, &cfg)?;
    let format = cfg.output.format;
    let body = match &outcome.body {
        Body::Table(t) => t.render(format),
        Body::Report(r) => r.render(format),
    };
    for note in &outcome.notes {
        eprintln!("note: {note}");
    }
    match &cfg.output.path {
        Some(path) => {
            write_file(path, &body)?;
            if let Some(s) = &outcome.summary {
                write_file(&summary_path(path), &s.to_json())?;
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))?;
            if let Some(s) = &outcome.summary {
                eprint!("{}", s.to_json());
            }
        }
    }
    Ok(outcome.failure)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// `out/table.csv` → `out/table.summary.json`.
pub fn summary_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.summary.json"))
}
