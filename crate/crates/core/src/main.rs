use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use kirchhoff_core::experiments::{self, csv, ExperimentConfig, Preset};

#[derive(Parser)]
#[command(name = "kirchhoff", version, about = "Stability and long-time simulation of a Kirchhoff underwater vehicle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the vertical equilibrium at the configured Pe (JSON).
    Classify(Common),
    /// Integrate perturbed trajectories, one CSV per eps and series divisor.
    Simulate(Common),
    /// Maximum excursion over the Pe grid, one CSV per eps.
    Sweep(Common),
    /// Continue the equilibrium over the Pe grid, one CSV per eps.
    Continue(Common),
    /// Compare measured periods with normal-form predictions.
    NfCheck(Common),
}

#[derive(Args)]
struct Common {
    /// TOML parameter file; keys not given keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, conflicts_with = "config")]
    preset: Option<Preset>,
    #[arg(long)]
    periods: Option<f64>,
    /// Dissipation strength, replaces the configured list.
    #[arg(long)]
    eps: Option<f64>,
}

impl Common {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match (&self.config, self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(p)) => p.config(),
            (None, None) => ExperimentConfig::default(),
        };
        if let Some(n) = self.periods {
            cfg.periods = n;
        }
        if let Some(e) = self.eps {
            cfg.eps = vec![e];
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `out.csv` with tag `eps0.05` becomes `out_eps0.05.csv`.
fn tagged(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{tag}.{ext}"),
        None => format!("{stem}_{tag}"),
    };
    path.with_file_name(name)
}

/// Writes each `(tag, text)` pair; tags are only used when there are several.
fn emit(out: Option<&Path>, parts: Vec<(String, String)>) -> anyhow::Result<()> {
    let single = parts.len() == 1;
    for (tag, text) in parts {
        match out {
            None => {
                if !single {
                    println!("# {tag}");
                }
                print!("{text}");
            }
            Some(path) => {
                let target = if single { path.to_path_buf() } else { tagged(path, &tag) };
                std::fs::write(&target, text).with_context(|| format!("writing {}", target.display()))?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Classify(c) => {
            let cfg = c.config()?;
            let report = experiments::cmd_classify(&cfg)?;
            let text = serde_json::to_string_pretty(&report)? + "\n";
            emit(c.out.as_deref(), vec![(String::new(), text)])
        }
        Command::Simulate(c) => {
            let cfg = c.config()?;
            let runs = experiments::cmd_simulate(&cfg)?;
            let parts = runs
                .iter()
                .map(|r| (format!("eps{}_k{}", r.eps, r.divisor), csv::simulation(r)))
                .collect();
            emit(c.out.as_deref(), parts)
        }
        Command::Sweep(c) => {
            let cfg = c.config()?;
            let parts = cfg
                .eps
                .iter()
                .map(|&e| (format!("eps{e}"), csv::sweep(&experiments::cmd_sweep(&cfg, e))))
                .collect();
            emit(c.out.as_deref(), parts)
        }
        Command::Continue(c) => {
            let cfg = c.config()?;
            let parts = cfg
                .eps
                .iter()
                .map(|&e| (format!("eps{e}"), csv::continuation(&experiments::cmd_continue(&cfg, e))))
                .collect();
            emit(c.out.as_deref(), parts)
        }
        Command::NfCheck(c) => {
            let cfg = c.config()?;
            let rows = experiments::cmd_nfcheck(&cfg)?;
            emit(c.out.as_deref(), vec![(String::new(), csv::nf_table(&rows))])
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
