//! `linkprob`: generate causal trees, sample them, learn link probabilities
//! from leaf samples, and score the results.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigFile;

#[derive(Debug, Parser)]
#[command(name = "linkprob", version, about)]
struct Cli {
    /// JSON file supplying defaults for any flag (kebab-case keys).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random complete tree.
    Gen(GenArgs),
    /// Draw samples from a tree.
    Sample(SampleArgs),
    /// Learn link probabilities from leaf samples.
    Learn(LearnArgs),
    /// Compare estimated parameters with the true ones.
    Eval(EvalArgs),
    /// Unsupervised vs. supervised error curves over several seeds.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub branching: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Lower end of the parameter range [default: 0.1].
    #[arg(long)]
    pub param_min: Option<f64>,
    /// Upper end of the parameter range [default: 0.9].
    #[arg(long)]
    pub param_max: Option<f64>,
    /// Minimum |f - g| per link [default: 0.1].
    #[arg(long)]
    pub min_gap: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub tree: Option<PathBuf>,
    /// Number of rows.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write hidden-node columns.
    #[arg(long)]
    pub full: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Tree file giving the structure (its parameters seed `perturb` init).
    #[arg(long)]
    pub tree: Option<PathBuf>,
    /// Sample CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// random | perturb:<sigma> | file:<path> [default: random]
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Maximum number of samples to consume.
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub window: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// unweighted | posterior [default: unweighted]
    #[arg(long)]
    pub weighting: Option<String>,
    /// Forgetting factor in (0, 1]; off unless given.
    #[arg(long)]
    pub forgetting: Option<f64>,
    #[arg(long)]
    pub checkpoint_every: Option<u64>,
    /// True tree; adds an `err` column to the trace.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Trace CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Final estimates [default: <out stem>.estimates.json].
    #[arg(long)]
    pub estimates_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub estimates: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Minimise over hidden-label flips.
    #[arg(long)]
    pub modulo_flips: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Comma list, ranges allowed (`0..10`) [default: 0..10].
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub n_max: Option<u64>,
    /// Comma list of sample counts [default: 1000,10000,100000].
    #[arg(long)]
    pub checkpoints: Option<String>,
    /// random | perturb:<sigma> | file:<path> [default: perturb:0.1]
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub weighting: Option<String>,
    #[arg(long)]
    pub forgetting: Option<f64>,
    /// Pseudo-count of the supervised baseline [default: 1].
    #[arg(long)]
    pub pseudo: Option<f64>,
    /// Per-seed CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Median summary [default: <out stem>.summary.json].
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = ConfigFile::load(cli.config.as_deref()).and_then(|cfg| match cli.command {
        Command::Gen(a) => commands::gen(a, &cfg),
        Command::Sample(a) => commands::sample(a, &cfg),
        Command::Learn(a) => commands::learn(a, &cfg),
        Command::Eval(a) => commands::eval(a, &cfg),
        Command::Compare(a) => commands::compare(a, &cfg),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
