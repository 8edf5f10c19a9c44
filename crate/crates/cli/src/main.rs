use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use serde_json::json;

mod commands;
mod config;
mod output;

use commands::bounds::BoundsArgs;
use commands::figures::{Fig2Args, Fig3Args};
use commands::validate::ValidateArgs;
use config::Resolver;
use output::Format;

/// Cramér-Rao bounds for joint estimation of trap and rotation frequencies
/// with a trapped-particle Sagnac interferometer.
#[derive(Parser)]
#[command(name = "sagnac", version)]
struct Cli {
    /// Flat key = value config file with optional [command] sections; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: standard output)
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal precisions, saturability and scaling for one scenario
    Bounds(BoundsArgs),
    /// Fock versus coherent comparison on an (omega0, kappa) grid
    Fig2(Fig2Args),
    /// Condition II over condition I ratio curves at equal trapping energy
    Fig3(Fig3Args),
    /// Oracle and identity checks with observed residuals
    Validate(ValidateArgs),
}

impl Command {
    fn section(&self) -> &'static str {
        match self {
            Command::Bounds(_) => "bounds",
            Command::Fig2(_) => "fig2",
            Command::Fig3(_) => "fig3",
            Command::Validate(_) => "validate",
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut res = Resolver::load(cli.config.as_deref(), cli.command.section())?;
    let format = res.or_default("format", cli.format, Format::Csv)?;
    let out = res.optional("out", cli.out)?;
    // The output location is not part of the reproducible configuration.
    res.resolved.retain(|(k, _)| k != "out");
    let (report, failed) = match &cli.command {
        Command::Bounds(args) => (commands::bounds::run(args, &mut res)?, 0),
        Command::Fig2(args) => (commands::figures::run_fig2(args, &mut res)?, 0),
        Command::Fig3(args) => (commands::figures::run_fig3(args, &mut res)?, 0),
        Command::Validate(args) => commands::validate::run(args, &mut res)?,
    };
    res.finish()?;
    report.emit(format, out.as_deref().map(std::path::Path::new))?;
    if failed > 0 {
        eprintln!("{}", json!({ "error": "ValidationFailed", "message": format!("{failed} checks failed") }));
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            let kind = err
                .chain()
                .find_map(|cause| cause.downcast_ref::<sagnac_qfim::Error>())
                .map_or("UsageError", |e| e.kind());
            eprintln!("{}", json!({ "error": kind, "message": format!("{err:#}") }));
            ExitCode::FAILURE
        }
    }
}
