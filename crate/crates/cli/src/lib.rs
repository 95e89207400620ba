//! Subcommands of the `featlets` tool. Each stage of the pipeline reads and
//! writes plain files, so any stage can be rerun on its own.

mod commands;
pub mod config;
pub mod run;

use std::path::PathBuf;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand};

use config::{Config, List};

#[derive(Parser, Debug)]
#[command(
    name = "featlets",
    version,
    about = "Featlet feature generation, selection and SRL training"
)]
pub struct Cli {
    /// `key = value` settings file; flags win over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for counting, scoring and training.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// More logging; repeat for trace output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Only warnings and errors.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write the bundled synthetic corpus and lexicons.
    GenToy(GenToyArgs),
    /// Search for legal templates on the training corpus.
    Enumerate(EnumerateArgs),
    /// Count template values over the gold training arguments.
    Count(CountArgs),
    /// Score feature products for each stage.
    Score(ScoreArgs),
    /// Rank, deduplicate and cut scored features into feature sets.
    Select(SelectArgs),
    /// Train both stages; with several feature set pairs, keep the best on dev.
    Train(TrainArgs),
    /// Decode a split and report precision, recall and F1.
    Eval(EvalArgs),
    /// F1 by feature set size of each stage.
    Grid(GridArgs),
    /// Print the values a template or product fires on one instance.
    Extract(ExtractArgs),
}

#[derive(Args, Debug)]
pub struct GenToyArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 60)]
    pub sentences: usize,
    #[arg(long, default_value_t = 12)]
    pub test: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// Flip test labels too, instead of keeping the planted rule there.
    #[arg(long)]
    pub noisy_test: bool,
}

/// Where the corpus lives: `train.conll`, `train.ann`, `test.conll`,
/// `test.ann` and the lexicon files.
#[derive(Args, Debug)]
pub struct DataArgs {
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub probes: Option<usize>,
    #[arg(long)]
    pub min_fire: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct CountArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub inventory: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub inventory: PathBuf,
    #[arg(long)]
    pub freq: PathBuf,
    /// Directory for `scores.<stage>.tsv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Only this stage; both by default.
    #[arg(long)]
    pub stage: Option<featlets::srl::Stage>,
    #[arg(long)]
    pub b: Option<u64>,
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub max_order: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub estimator: Option<featlets::selection::Estimator>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// β of the `final` column; the first of the list.
    #[arg(long)]
    pub beta: Option<List<f64>>,
}

#[derive(Args, Debug)]
pub struct SelectArgs {
    /// Directory holding `scores.<stage>.tsv`.
    #[arg(long)]
    pub scores: PathBuf,
    /// Directory for `features.<stage>.beta<β>.txt`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub beta: Option<List<f64>>,
    /// Features kept per set.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TrainOpts {
    #[arg(long)]
    pub passes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dev_fraction: Option<f64>,
    #[arg(long)]
    pub gold_union: Option<bool>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub freq: PathBuf,
    /// Argument identification feature set; repeat to try several.
    #[arg(long, required = true)]
    pub argid: Vec<PathBuf>,
    /// Role classification feature set, paired with the `--argid` at the
    /// same position.
    #[arg(long, required = true)]
    pub roleclass: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub opts: TrainOpts,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Split {
    Train,
    Test,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub freq: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = Split::Test)]
    pub split: Split,
    /// Label gold argument spans instead of identifying them.
    #[arg(long)]
    pub gold_args: bool,
    /// Report file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub freq: PathBuf,
    #[arg(long)]
    pub argid: PathBuf,
    #[arg(long)]
    pub roleclass: PathBuf,
    #[arg(long)]
    pub sizes: Option<List<usize>>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub opts: TrainOpts,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub freq: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Split::Train)]
    pub split: Split,
    /// `sentence/target/argument[/role]`, spans as `start-end`.
    #[arg(long)]
    pub instance: String,
    /// Template or product (`;` between members).
    #[arg(long)]
    pub template: String,
    /// Also write the values, with a manifest, to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Cli {
    pub fn log_level(&self) -> log::LevelFilter {
        match (self.quiet, self.verbose) {
            (true, _) => log::LevelFilter::Warn,
            (false, 0) => log::LevelFilter::Info,
            (false, 1) => log::LevelFilter::Debug,
            _ => log::LevelFilter::Trace,
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let workers = config.pick("workers", cli.workers, rayon::current_num_threads())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("starting worker pool")?;
    pool.install(|| commands::dispatch(cli.command, config, workers))
}
