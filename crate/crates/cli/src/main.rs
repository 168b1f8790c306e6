//! `jfp`: data generation, training, evaluation and verification runs.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::UsageError;

#[derive(Debug, Parser)]
#[command(name = "jfp", version, about = "Joint future prediction experiments on synthetic driving scenes")]
struct Cli {
    /// `key=value` file supplying defaults for the subcommand's flags. Flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic scene dataset (one JSON scene per line).
    GenData(GenDataArgs),
    /// Train a model and write a checkpoint and loss log.
    Train(TrainArgs),
    /// Evaluate a checkpoint and write a metric report.
    Eval(EvalArgs),
    /// Evaluate every interaction graph type side by side.
    AblateGraphs(AblateArgs),
    /// Evaluate with the AV clamped to its closest candidate.
    ConditionalEval(EvalArgs),
    /// Finite-difference checks of the training gradients; exits 1 on failure.
    CheckGradients(CheckArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Comma-separated scenario kinds: intersection, merge, queue, random_mix.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed agent count per scene.
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct TrainOpts {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Fraction of steps after which the learning rate is multiplied by `lr-decay`; 1 disables.
    #[arg(long)]
    lr_decay_at: Option<f64>,
    #[arg(long)]
    lr_decay: Option<f64>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct InferenceOpts {
    /// none, random-star, av-star, dynamic or fully-connected.
    #[arg(long)]
    graph: Option<String>,
    /// learned, heuristic or none.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long)]
    bp_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    /// Checkpoint path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Loss log CSV; defaults to the checkpoint path with `.loss.csv` appended.
    #[arg(long)]
    loss_log: Option<PathBuf>,
    /// Checkpoint to continue from.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    train: TrainOpts,
    #[command(flatten)]
    inference: InferenceOpts,
}

#[derive(Debug, Args, Clone, Default)]
pub struct MetricOpts {
    #[arg(long)]
    miss_threshold: Option<f64>,
    #[arg(long)]
    top_n: Option<usize>,
    #[arg(long)]
    pair_radius: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Report JSON path. The summary table always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-metric series files.
    #[arg(long)]
    series_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    label: Option<String>,
    #[command(flatten)]
    inference: InferenceOpts,
    #[command(flatten)]
    metrics: MetricOpts,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Evaluation dataset.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Train one model per graph type on this dataset.
    #[arg(long, conflicts_with = "checkpoint")]
    train_data: Option<PathBuf>,
    /// Evaluate one existing checkpoint under every graph type instead of training.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Receives reports.json, table.txt and the series files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Potential used for every graph type except `none`: learned or heuristic.
    #[arg(long)]
    potential: Option<String>,
    #[arg(long)]
    bp_iterations: Option<usize>,
    #[command(flatten)]
    train: TrainOpts,
    #[command(flatten)]
    metrics: MetricOpts,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    /// Check every parameter coordinate instead of a per-parameter sample.
    #[arg(long)]
    full: bool,
    /// Use narrow layer widths (fast enough for a full check).
    #[arg(long)]
    narrow: bool,
    /// Sampled coordinates per parameter when not running a full check.
    #[arg(long)]
    coords: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.config.as_deref(), cli.command) {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
