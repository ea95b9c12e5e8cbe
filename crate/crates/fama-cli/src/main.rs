//! `fama-sim`: link-level simulator for fluid-antenna multiple access.
//!
//! Precedence of configuration sources, lowest to highest:
//! defaults → `--preset` → `--config` file → `--set` overrides →
//! direct flags (`--seed`, `--trials`, `--out`).

use clap::Parser;
use fama_cli::{preset, run_experiment, CliResult, RunConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "fama-sim",
    version,
    about = "Fluid-antenna multiple-access link simulator (PUMA, CUMA, sFAMA)"
)]
struct Cli {
    /// Config file ([channel]/[receiver]/[run] sections of key = value lines)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Experiment preset: pdf-z, rate-vs-users, rho-nmax-sweep, nrf-compare, custom
    #[arg(long)]
    preset: Option<String>,

    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,

    /// Trial count override
    #[arg(long)]
    trials: Option<usize>,

    /// Output CSV path override
    #[arg(long)]
    out: Option<PathBuf>,

    /// Repeatable section.key=value override
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn build_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.preset {
        Some(name) => preset(name)?,
        None => RunConfig::default(),
    };
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            fama_cli::CliError::io(format!("cannot read config {}: {e}", path.display()))
        })?;
        cfg.apply_document(&text)?;
    }
    for kv in &cli.set {
        cfg.apply_override(kv)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() {
    let cli = Cli::parse();
    let result = build_config(&cli).and_then(|cfg| run_experiment(&cfg));
    if let Err(e) = result {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
