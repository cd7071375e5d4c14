#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use logobs::Error;

use commands::Ui;
use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(version, about = "Solve and analyze the singular obstacle problem -Δu = log u on {u > 0}")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Plain-text key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized inputs
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
    /// Override a configuration key, e.g. --set n=257
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Solve,
    Analyze,
    Blowup,
    Oracle,
    Report,
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let base = match &cli.config {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| ConfigError(format!("reading {}: {e}", path.display())))?;
            cfg.parse_text(&text)?;
            path.parent().map(PathBuf::from).unwrap_or_default()
        }
        None => PathBuf::new(),
    };
    for item in &cli.overrides {
        let (k, v) =
            item.split_once('=').ok_or_else(|| ConfigError(format!("--set expects KEY=VALUE, got `{item}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let cwd = std::env::current_dir().context("current directory")?;
    cfg.resolve(&cwd.join(base))?;
    std::fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    Ok(cfg)
}

/// 1: configuration or input, 2: numerical failure, 3: unmet precondition.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::NotAFreeBoundaryPoint(..)
            | Error::EmptyFreeBoundary
            | Error::BallOutsideDomain { .. }
            | Error::DomainTooSmall
            | Error::InsufficientRadii
            | Error::TooFewPoints { .. },
        ) => 3,
        Some(
            Error::NonConvergence { .. }
            | Error::DivergingEnergy { .. }
            | Error::SeedTooLarge { .. }
            | Error::BlowThrough(_)
            | Error::NonPositiveEnergyGap { .. }
            | Error::NonFinite(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ui = Ui { quiet: cli.quiet };
    let result = load_config(&cli).and_then(|cfg| match cli.command {
        Command::Solve => commands::cmd_solve(&cfg, &ui),
        Command::Analyze => commands::cmd_analyze(&cfg, &ui),
        Command::Blowup => commands::cmd_blowup(&cfg, &ui),
        Command::Oracle => commands::cmd_oracle(&cfg, &ui),
        Command::Report => commands::cmd_report(&cfg, &ui),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
