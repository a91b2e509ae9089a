use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use wgchain_cli::config::{self, ConfigFile, Method, Overrides};
use wgchain_cli::runner::{execute_with_workers, write_artifacts};

#[derive(Parser)]
#[command(name = "wgchain", version, about = "Collective emission of waveguide-coupled atomic chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write probabilities.csv, profiles.csv and summary.json.
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario name (fig2, fig3b, fig3c, fig4, fig5, fig7a, fig7b, bare).
    name: Option<String>,
    #[arg(long, conflicts_with = "name")]
    scenario: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Multiplies every segment count (at least one atom per segment).
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of disorder realizations.
    #[arg(long)]
    ensemble: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

fn run(args: RunArgs) -> anyhow::Result<bool> {
    let overrides = Overrides {
        scenario: args.name.or(args.scenario),
        method: args.method,
        scale: args.scale,
        seed: args.seed,
        ensemble: args.ensemble,
        out: args.out,
        workers: args.workers,
    };
    let cfg = match &args.config {
        Some(path) => config::load(path, &overrides)?,
        None => config::resolve(ConfigFile::default(), &overrides)?,
    };
    let output = execute_with_workers(&cfg)?;
    write_artifacts(&output, &cfg.out).with_context(|| format!("writing to {}", cfg.out.display()))?;
    let s = &output.summary;
    println!(
        "{} atoms, method {:?}, converged {}, ledger L {:.6} R {:.6} raman {:.6} ext {:.6}",
        cfg.chain.total_atoms(),
        s.method_used,
        s.converged,
        s.ledger.p_left,
        s.ledger.p_right,
        s.ledger.p_raman,
        s.ledger.p_ext
    );
    println!("wrote {}", cfg.out.display());
    Ok(s.converged)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match run(args) {
            Ok(_) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}
