mod commands;
mod config;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use gradcode::Scheme;
use serde::Serialize;
use toml::Table;

use config::{parse_override, resolve, Config, RUN_SECTION};

/// Simulator and analysis tool for straggler-tolerant coded gradient computation.
#[derive(Parser, Debug)]
#[command(name = "gradcode", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration; must define every key of the sections the command reads.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Master seed (`simulate.seed` and `gd.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override a configuration key, e.g. `--set straggler.mu=5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_override)]
    set: Vec<(String, String)>,

    /// Monte Carlo trials (`simulate.trials`).
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Comma-separated tolerance rates (`simulate.tolerance_grid`).
    #[arg(long, global = true, value_delimiter = ',')]
    tolerance_grid: Option<Vec<f64>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate the four-worker example and compare with the expected tables.
    Tables,
    /// Exact completion-time CDFs and expected times for a small cluster.
    Analyze,
    /// Monte Carlo sweep over tolerance rates.
    Simulate,
    /// Gradient descent on synthetic linear regression.
    Gd,
    /// Write a schedule matrix as JSON and text.
    DumpSchedule {
        #[arg(long)]
        scheme: Scheme,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Tables => "tables",
            Command::Analyze => "analyze",
            Command::Simulate => "simulate",
            Command::Gd => "gd",
            Command::DumpSchedule { .. } => "dump-schedule",
        }
    }

    fn sections(&self) -> &'static [&'static str] {
        match self {
            Command::Tables => &[],
            Command::Analyze => &["cluster", "straggler", "analyze"],
            Command::Simulate => &["cluster", "straggler", "simulate"],
            Command::Gd => &["cluster", "straggler", "gd"],
            Command::DumpSchedule { .. } => &["cluster"],
        }
    }
}

#[derive(Serialize)]
struct RunInfo {
    subcommand: String,
    config: String,
    out: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    overrides: Vec<String>,
}

fn overrides(cli: &Cli) -> Vec<(String, String)> {
    let mut all = cli.set.clone();
    if let Some(seed) = cli.seed {
        all.push(("simulate.seed".into(), seed.to_string()));
        all.push(("gd.seed".into(), seed.to_string()));
    }
    if let Some(n) = cli.trials {
        all.push(("simulate.trials".into(), n.to_string()));
    }
    if let Some(grid) = &cli.tolerance_grid {
        let items: Vec<String> = grid.iter().map(|x| format!("{x:?}")).collect();
        all.push(("simulate.tolerance_grid".into(), format!("[{}]", items.join(", "))));
    }
    all
}

fn write_manifest(cli: &Cli, cfg: &Config, out: &Path) -> Result<()> {
    let run = RunInfo {
        subcommand: cli.command.name().into(),
        config: cli.config.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
        out: out.display().to_string(),
        seed: match cli.command {
            Command::Simulate => Some(cfg.simulate.seed),
            Command::Gd => Some(cfg.gd.seed),
            _ => None,
        },
        overrides: overrides(cli).iter().map(|(k, v)| format!("{k}={v}")).collect(),
    };
    let mut table = cfg.to_table();
    table.insert(RUN_SECTION.into(), Table::try_from(&run)?.into());
    let path = out.join("manifest.toml");
    std::fs::write(&path, toml::to_string(&table)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = resolve(cli.config.as_deref(), cli.command.sections(), &overrides(&cli))?;
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    write_manifest(&cli, &cfg, &cli.out)?;
    match &cli.command {
        Command::Tables => commands::tables(&cli.out),
        Command::Analyze => commands::analyze(&cfg, &cli.out),
        Command::Simulate => commands::simulate(&cfg, &cli.out),
        Command::Gd => commands::gd(&cfg, &cli.out),
        Command::DumpSchedule { scheme } => commands::dump_schedule(&cfg, *scheme, &cli.out),
    }
}
