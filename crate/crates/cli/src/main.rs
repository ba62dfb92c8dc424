use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use ris_pnc_cli::{parse_config, recipes, run, OutputFormat};

/// Monte Carlo BER sweeps for RIS-assisted OFDM physical-layer network coding.
#[derive(Debug, Parser)]
#[command(name = "ris-pnc", version)]
struct Cli {
    /// TOML run configuration. Omitted fields take the reference defaults.
    #[arg(conflicts_with = "recipe")]
    config: Option<PathBuf>,

    /// Built-in recipe to run instead of a config file.
    #[arg(long, value_parser = recipes::NAMES)]
    recipe: Option<String>,

    /// Master seed; overrides the config and PNC_RIS_SEED.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,

    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn execute(cli: Cli) -> Result<()> {
    let text = match (&cli.config, &cli.recipe) {
        (Some(path), _) => std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?,
        (None, Some(name)) => recipes::recipe(name).context("unknown recipe")?.to_string(),
        (None, None) => String::new(),
    };
    let mut cfg = parse_config(&text)?;
    if let Ok(raw) = std::env::var("PNC_RIS_SEED") {
        let seed =
            raw.trim().parse().with_context(|| format!("PNC_RIS_SEED must be an unsigned integer, got '{raw}'"))?;
        cfg.set_seed(seed);
    }
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    let mut stdout = std::io::stdout().lock();
    run(&cfg, &mut stdout)?;
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
