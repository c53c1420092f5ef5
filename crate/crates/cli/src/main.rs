//! `hwk` -- batch front-end for the hate-speech toolkit.
//!
//! Every subcommand reads an optional flat config file, applies flag
//! overrides, and reports failures as a single machine-readable JSON line
//! on stderr (`{"error": "<category>", "message": "..."}`).  Exit code 2
//! flags configuration mistakes, 1 everything else.

mod commands;
mod config;
mod error;
mod runs;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use commands::evaluate::Task;
use config::{load_config, Overrides, RawConfig, Settings};
use error::CliError;

#[derive(Parser)]
#[command(name = "hwk", version, about = "Multilingual hate-speech experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the commands that resolve a full settings snapshot.
#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model kind: logreg, linsvc, bigru, or charcnn.
    #[arg(long)]
    model: Option<String>,
    /// Dataset language: en or es.
    #[arg(long)]
    lang: Option<String>,
    /// Label dimension to train/score: hs, tr, or ag.
    #[arg(long)]
    dim: Option<String>,
    /// RNG seed (falls back to config, then $HWK_SEED, then 42).
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn settings(&self) -> Result<Settings, CliError> {
        let raw = match &self.config {
            Some(path) => load_config(path)?,
            None => RawConfig::empty(),
        };
        let overrides = Overrides {
            model: self.model.clone(),
            lang: self.lang.clone(),
            dim: self.dim.clone(),
            seed: self.seed,
        };
        Settings::resolve(&raw, &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Clean and tokenize a dataset, writing the token view as TSV.
    Preprocess {
        #[command(flatten)]
        common: Common,
        /// Dataset TSV (id, text, HS, TR, AG).
        #[arg(long)]
        data: PathBuf,
        /// Output TSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model and write a self-contained run directory.
    Train {
        #[command(flatten)]
        common: Common,
        /// Training split TSV.
        #[arg(long)]
        train: PathBuf,
        /// Development split TSV (scored after training).
        #[arg(long)]
        dev: PathBuf,
        /// Run directory to create (must be empty or absent).
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Score a prediction TSV against gold labels.
    Evaluate {
        /// Predictions TSV (id, HS, TR, AG).
        #[arg(long)]
        pred: PathBuf,
        /// Gold labels: same layout, or a full dataset TSV.
        #[arg(long)]
        gold: PathBuf,
        /// a = one dimension, b = multi-label (EMR + averaged macro-F1).
        #[arg(long, default_value = "a")]
        task: String,
        /// Dimension for task a: hs, tr, or ag.
        #[arg(long, default_value = "hs")]
        dim: String,
        /// Also write metrics.csv and confusion SVGs here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Explain a linear run: LIME for one text, or global weights.
    Explain {
        /// Run directory produced by `hwk train`.
        #[arg(long)]
        run_dir: PathBuf,
        /// Tweet text to explain locally; omit for global importance.
        #[arg(long)]
        text: Option<String>,
        /// Write artifacts here instead of printing to stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Compare annotation rates between two labeled splits.
    Audit {
        #[command(flatten)]
        common: Common,
        /// Training split TSV.
        #[arg(long)]
        train: PathBuf,
        /// Test split TSV.
        #[arg(long)]
        test: PathBuf,
        /// Minimum pattern support in both splits (overrides config).
        #[arg(long)]
        min_support: Option<usize>,
        /// Write discrepancy.csv and hashtag tables here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Cross-validated sweep over the linear hyper-parameter grid.
    Gridsearch {
        #[command(flatten)]
        common: Common,
        /// Training split TSV.
        #[arg(long)]
        train: PathBuf,
        /// Run directory to create (must be empty or absent).
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Preprocess { common, data, out } => {
            commands::preprocess::run(&common.settings()?, &data, &out)
        }
        Command::Train { common, train, dev, out_dir } => {
            commands::train::run(&common.settings()?, &train, &dev, &out_dir)
        }
        Command::Evaluate { pred, gold, task, dim, out_dir } => {
            let task = Task::parse(&task).map_err(CliError::Config)?;
            let dim = parse_dim_flag(&dim)?;
            commands::evaluate::run(task, dim, &pred, &gold, out_dir.as_deref())
        }
        Command::Explain { run_dir, text, out_dir } => {
            commands::explain::run(&run_dir, text.as_deref(), out_dir.as_deref())
        }
        Command::Audit { common, train, test, min_support, out_dir } => {
            let settings = common.settings()?;
            let min_support = min_support.unwrap_or(settings.min_support);
            commands::audit::run(settings.lang, min_support, &train, &test, out_dir.as_deref())
        }
        Command::Gridsearch { common, train, out_dir } => {
            commands::gridsearch::run(&common.settings()?, &train, &out_dir)
        }
    }
}

fn parse_dim_flag(s: &str) -> Result<hwk_core::corpus::LabelDim, CliError> {
    match s {
        "hs" => Ok(hwk_core::corpus::LabelDim::Hs),
        "tr" => Ok(hwk_core::corpus::LabelDim::Tr),
        "ag" => Ok(hwk_core::corpus::LabelDim::Ag),
        other => Err(CliError::Config(format!(
            "unknown label dimension {other:?} (expected hs, tr, or ag)"
        ))),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("{}", e.machine_line());
        std::process::exit(e.exit_code());
    }
}
