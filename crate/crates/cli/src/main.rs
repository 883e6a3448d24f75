//! Batch experiment driver. Exit codes: 0 success, 1 usage, 2 runtime
//! failure.

use clap::{Parser, Subcommand};
use p2plab_cli::commands;
use p2plab_cli::config::{load_config, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "p2plab",
    about = "Near-field layout laboratory: sweeps, cache-model locality reports and speedup predictions",
    version
)]
struct Cli {
    /// Configuration file (key = value lines under [section] headers).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base seed; overrides the config. P2PLAB_SEED overrides both.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Leaf counts, interaction counts and E2 statistics over the sweep.
    TreeStats,
    /// Build, pack, execute, trace and time both layouts over the sweep.
    Run,
    /// Evaluate the speedup model over the sweep.
    Predict {
        /// Measured run CSV; enables fitted shares and measured ratios.
        #[arg(long)]
        measured: Option<PathBuf>,
    },
    /// Join measured and predicted tables; report trend metrics and charts.
    Compare {
        measured: PathBuf,
        predicted: PathBuf,
    },
    /// Fit share(t) = a + b ln t per component from a measured run CSV.
    FitShares { measured: PathBuf },
}

fn effective_config(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Ok(env_seed) = std::env::var("P2PLAB_SEED") {
        cfg.seed = Some(
            env_seed
                .parse()
                .map_err(|e| anyhow::anyhow!("P2PLAB_SEED: {e}"))?,
        );
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output is not an error
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let cfg = match effective_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("p2plab: {e:#}");
            return ExitCode::from(1);
        }
    };
    let result = match &cli.cmd {
        Cmd::TreeStats => commands::cmd_tree_stats(&cfg),
        Cmd::Run => commands::cmd_run(&cfg),
        Cmd::Predict { measured } => commands::cmd_predict(&cfg, measured.as_deref()),
        Cmd::Compare {
            measured,
            predicted,
        } => commands::cmd_compare(&cfg, measured, predicted),
        Cmd::FitShares { measured } => commands::cmd_fit_shares(&cfg, measured),
    };
    match result {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            // configuration and usage mistakes exit 1, runtime failures 2
            let msg = format!("{e:#}");
            eprintln!("p2plab: {msg}");
            let usage = msg.contains("seed is mandatory")
                || msg.contains("config ")
                || msg.contains("t_sweep")
                || msg.contains("unknown");
            ExitCode::from(if usage { 1 } else { 2 })
        }
    }
}
