//! `hnn` — dataset generation, training, evaluation and SNR sweeps for
//! the hybrid radar target-recognition network.

mod commands;
mod config;
mod manifest;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Error with a process exit code: 1 usage, 2 data/format, 3 numeric.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub msg: String,
}

impl CliError {
    pub fn usage(msg: String) -> Self {
        CliError { code: 1, msg }
    }

    pub fn data(msg: String) -> Self {
        CliError { code: 2, msg }
    }

    pub fn numeric(msg: String) -> Self {
        CliError { code: 3, msg }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.msg)
    }
}

impl From<hnn_core::Error> for CliError {
    fn from(err: hnn_core::Error) -> Self {
        use hnn_core::Error as E;
        let code = match &err {
            E::Format { .. } | E::Io(_) => 2,
            E::Numeric(_) => 3,
            _ => 1,
        };
        CliError {
            code,
            msg: err.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hnn",
    version,
    about = "Hybrid neural network for radar target recognition from raw chirp echoes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic raw-data set
    Generate(GenerateArgs),
    /// Train a model; writes checkpoint, metrics CSV and manifest
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset
    Eval(EvalArgs),
    /// Evaluate a checkpoint on fresh validation sets across noise levels
    SweepSnr(SweepSnrArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value config file (defaults < file < flags)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (1 guarantees bit-reproducibility; HNN_THREADS is
    /// the fallback)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of samples
    #[arg(long)]
    n: Option<usize>,
    /// Signal-to-noise ratio in dB, or "inf" for noiseless
    #[arg(long)]
    snr: Option<String>,
    /// Scale profile: desk or full
    #[arg(long)]
    profile: Option<String>,
    /// Generation seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Model variant: hybrid or baseline
    #[arg(long)]
    variant: Option<String>,
    /// Scale profile: desk or full
    #[arg(long)]
    profile: Option<String>,
    /// Directory holding dataset.hrd1 (training data)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Directory holding dataset.hrd1 (validation data); generated when
    /// absent
    #[arg(long)]
    val_data: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    /// Learning rate for everything but the first-layer SP parameters
    #[arg(long)]
    lr_main: Option<f64>,
    /// Learning rate for the matched-filter scale parameters
    #[arg(long)]
    lr_sp: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Record wall-clock seconds in the metrics CSV (makes it
    /// non-reproducible)
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Model checkpoint (.hnn)
    #[arg(long)]
    ckpt: Option<PathBuf>,
    /// Directory holding dataset.hrd1
    #[arg(long)]
    data: Option<PathBuf>,
    /// Expected profile; validated against the checkpoint when given
    #[arg(long)]
    profile: Option<String>,
    /// Expected variant; validated against the checkpoint when given
    #[arg(long)]
    variant: Option<String>,
}

#[derive(Args)]
struct SweepSnrArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Model checkpoint (.hnn)
    #[arg(long)]
    ckpt: Option<PathBuf>,
    /// Comma-separated SNR list in dB
    #[arg(long)]
    snr: Option<String>,
    /// Validation samples per SNR point
    #[arg(long)]
    n_per_point: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                std::process::exit(0);
            }
            eprint!("{err}");
            std::process::exit(1);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => commands::run_generate(args),
        Command::Train(args) => commands::run_train(args),
        Command::Eval(args) => commands::run_eval(args),
        Command::SweepSnr(args) => commands::run_sweep_snr(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(err.code);
    }
}
