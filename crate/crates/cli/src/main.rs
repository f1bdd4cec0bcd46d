//! `netlearn`: batch runner for equilibrium, learning, rate, simulation and
//! society experiments described by a single JSON config.
//!
//! Exit status: 0 on success, 1 for configuration or input errors, 2 when a
//! brute-force solve exceeds its budget, 3 when an internal invariant fails.

mod builtin;
mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use netlearn::montecarlo::SimulationConfig;

use crate::output::{sha256_hex, Artifacts, Manifest};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] netlearn::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Core(netlearn::Error::Input(_)) => 1,
            CliError::Core(netlearn::Error::Budget { .. }) => 2,
            CliError::Core(netlearn::Error::Internal(_)) | CliError::Internal(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "netlearn", version, about = "Information exchange games on directed networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's output.dir, else ./netlearn-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed for Monte Carlo runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trial count.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, env = "NETLEARN_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Equilibria and per-agent payoff tables.
    Solve,
    /// Learning verdicts from the equilibrium signal counts.
    Learn,
    /// Learning-rate sequences over a society.
    Rates,
    /// Monte Carlo estimate of the learning failure probability.
    Mc,
    /// Equilibrium- and socially-informed agents along a society.
    Society,
    /// Built-in worked examples with stable text outputs.
    #[command(name = "paper-examples")]
    Builtin,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Learn => "learn",
            Command::Rates => "rates",
            Command::Mc => "mc",
            Command::Society => "society",
            Command::Builtin => "paper-examples",
        }
    }
}

const DEFAULT_TRIALS: u64 = 100_000;

fn run(cli: &Cli) -> Result<(), CliError> {
    let threads = cli.threads.unwrap_or(0);
    if threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let threads = rayon::current_num_threads();

    let mut artifacts = Artifacts::default();
    let (summary, manifest_parts) = if let Command::Builtin = cli.command {
        let summary = builtin::run(&mut artifacts)?;
        let hash = sha256_hex(b"netlearn built-in examples");
        (summary, (None, hash, serde_json::Value::Null, None, None, None))
    } else {
        let path = cli.config.as_ref().ok_or_else(|| CliError::Config(format!("`{}` needs --config PATH", cli.command.name())))?;
        let mut loaded = config::load(path)?;
        let mut mc_cfg = None;
        let summary = match cli.command {
            Command::Solve => commands::solve(&loaded, &mut artifacts)?,
            Command::Learn => commands::learn(&loaded, &mut artifacts)?,
            Command::Rates => commands::rates(&loaded, &mut artifacts)?,
            Command::Society => commands::society(&loaded, &mut artifacts)?,
            Command::Mc => {
                let base = loaded.config.monte_carlo;
                let cfg = SimulationConfig::new(
                    cli.trials.or(base.map(|c| c.trials())).unwrap_or(DEFAULT_TRIALS),
                    cli.seed.or(base.map(|c| c.master_seed())).unwrap_or(0),
                    base.map_or(3.0, |c| c.confidence_z()),
                )?;
                loaded.config.monte_carlo = Some(cfg);
                mc_cfg = Some(cfg);
                commands::mc(&loaded, &cfg, &mut artifacts)?
            }
            Command::Builtin => unreachable!("handled above"),
        };
        let effective = serde_json::to_value(&loaded.config).map_err(|e| CliError::Internal(e.to_string()))?;
        (
            summary,
            (
                Some(path.clone()),
                sha256_hex(&loaded.raw),
                effective,
                mc_cfg.map(|c| c.master_seed()),
                mc_cfg.map(|c| c.trials()),
                loaded.config.output.dir.clone(),
            ),
        )
    };
    let (config_path, config_sha256, effective_config, seed, trials, config_dir) = manifest_parts;
    let dir = cli.out.clone().or(config_dir).unwrap_or_else(|| PathBuf::from("netlearn-out"));

    let mut outputs = artifacts.names();
    outputs.push("manifest.json".into());
    let manifest = Manifest {
        tool: "netlearn",
        cli_version: env!("CARGO_PKG_VERSION"),
        library_version: netlearn::VERSION,
        subcommand: cli.command.name().into(),
        config_path,
        config_sha256,
        effective_config,
        seed,
        trials,
        threads,
        outputs,
    };
    artifacts.json("manifest.json", &manifest)?;
    artifacts.write_all(&dir)?;
    for line in summary {
        println!("{line}");
    }
    println!("wrote {} files to {}", artifacts.names().len(), dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("netlearn: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
