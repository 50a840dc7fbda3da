//! `ngrayleigh`: solve, map, propagate and re-check fundamental frequency
//! solutions from a TOML run configuration.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use output::OutputDir;

#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the environment and the config file.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One solve in ffs, muhat, fixed-lambda or appendix mode.
    Solve,
    /// mu_hat^0, S(mu), the branch S -> lambda_hat and the extremal curve.
    Atlas,
    /// Propagate perturbed ground states and track the orbital distance.
    Stability,
    /// Re-check a saved profile against the stationary equation.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Atlas => "atlas",
            Command::Stability => "stability",
            Command::Verify => "verify",
        }
    }
}

/// Configuration problems exit with 2, numerical failures with 1.
fn is_usage(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.downcast_ref::<toml::de::Error>().is_some()
            || matches!(e.downcast_ref::<ngrayleigh::Error>(), Some(ngrayleigh::Error::Config(_)))
    })
}

fn run(cli: &Cli) -> anyhow::Result<String> {
    let path = cli.config.as_deref().ok_or_else(|| anyhow::anyhow!("--config <FILE> is required"))?;
    let cfg = RunConfig::load(path)?;
    let mut out = OutputDir::create(&cfg.output_dir(cli.out.as_deref()))?;
    let result = match cli.command {
        Command::Solve => commands::solve(&cfg, &mut out),
        Command::Atlas => commands::atlas(&cfg, &mut out),
        Command::Stability => commands::stability(&cfg, &mut out),
        Command::Verify => commands::verify(&cfg, &mut out),
    };
    let root = out.root().to_path_buf();
    out.finish(cli.command.name(), &cfg)?;
    result.map(|line| format!("{line}\nresults in {}", root.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_usage(&err) { 2 } else { 1 })
        }
    }
}
