//! Command-line experiment runner: dataset statistics, augmentation runs,
//! quality scoring, downstream evaluation and combined reports.

pub mod commands;
pub mod config;
pub mod error;
pub mod tables;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use textaug::corpus::{DatasetFormat, Split};

pub use config::ExperimentConfig;
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "textaug", version, about = "Augment imbalanced multi-label text datasets and measure the effect")]
pub struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run seed; overrides the seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Replace every provider with the seeded offline mock.
    #[arg(long, global = true)]
    pub mock: bool,
    /// Output directory; overrides `output_dir` in the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// More log output on stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label counts and label correlation.
    Stats(StatsArgs),
    /// Run augmentation plans and write `<out>/<plan>/augmented.jsonl`.
    ///
    /// Oversampling with factor n adds n copies of each target record, so
    /// the original plus copies gives n + 1 occurrences.
    Augment(AugmentArgs),
    /// Lexical diversity and semantic fidelity of augmented records.
    Quality(PlanArgs),
    /// Train the proxy classifier on original and augmented data and compare.
    TrainEval(TrainEvalArgs),
    /// Combine per-plan results into `<out>/report.md`.
    Report,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Print only the `k` least represented labels.
    #[arg(long)]
    pub k: Option<usize>,
    /// Dataset file(s); replaces the configured dataset.
    #[arg(long = "dataset")]
    pub datasets: Vec<PathBuf>,
    #[arg(long)]
    pub format: Option<DatasetFormat>,
    /// Label file (one label per line); required for TSV input.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Count only these splits (repeatable).
    #[arg(long = "split")]
    pub splits: Vec<Split>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Plan to process; all configured plans when omitted.
    #[arg(long)]
    pub plan: Option<String>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Re-run the plan recorded in a manifest written by an earlier run.
    #[arg(long, conflicts_with_all = ["config", "plan"])]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainEvalArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Score predictions from an external model (JSONL `{id, labels}`)
    /// instead of training the proxy classifier on the augmented data.
    #[arg(long, requires = "plan")]
    pub predictions: Option<PathBuf>,
    /// External predictions for the baseline row.
    #[arg(long, requires = "predictions")]
    pub baseline_predictions: Option<PathBuf>,
}

/// Resolved global options shared by the commands.
#[derive(Debug, Clone)]
pub struct Session {
    pub config: ExperimentConfig,
    pub seed: Option<u64>,
    pub mock: bool,
    pub out: Option<PathBuf>,
}

impl Session {
    pub fn new(config: ExperimentConfig, seed: Option<u64>, mock: bool, out: Option<PathBuf>) -> Result<Self> {
        config.validate()?;
        let seed = seed.or(config.seed);
        let out = out.or_else(|| config.output_dir.clone());
        Ok(Self { config, seed, mock, out })
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| CliError::Config("no seed: set `seed` in the configuration or pass --seed".into()))
    }

    pub fn out(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Config("no output directory: set `output_dir` or pass --out".into()))
    }

    /// Seed for the mock provider when `--mock` is active.
    pub fn mock_seed(&self) -> Result<Option<u64>> {
        if self.mock {
            self.seed().map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn plan_dir(&self, plan: &str) -> Result<PathBuf> {
        Ok(self.out()?.join(plan))
    }

    /// Names of the requested plan, or of every configured plan.
    pub fn plan_names(&self, requested: Option<&str>) -> Result<Vec<String>> {
        match requested {
            Some(name) => Ok(vec![self.config.plan(name)?.name.clone()]),
            None if self.config.plans.is_empty() => Err(CliError::Config("no plans configured".into())),
            None => Ok(self.config.plans.iter().map(|p| p.name.clone()).collect()),
        }
    }
}

fn load_session(cli: &Cli) -> Result<Session> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("this command needs --config".into()))?;
    Session::new(ExperimentConfig::from_file(path)?, cli.seed, cli.mock, cli.out.clone())
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Stats(args) => {
            let session = match &cli.config {
                Some(_) => Some(load_session(&cli)?),
                None => None,
            };
            let mut stdout = std::io::stdout().lock();
            commands::stats::run(session.as_ref(), cli.out.as_deref(), args, &mut stdout)
        }
        Command::Augment(args) => match &args.manifest {
            Some(path) => commands::augment::rerun(path, cli.seed, cli.mock, cli.out.clone()),
            None => commands::augment::run(&load_session(&cli)?, args.plan.plan.as_deref()),
        },
        Command::Quality(args) => commands::quality::run(&load_session(&cli)?, args.plan.as_deref()),
        Command::TrainEval(args) => commands::train_eval::run(&load_session(&cli)?, args),
        Command::Report => commands::report::run(&load_session(&cli)?),
    }
}

pub(crate) fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) => fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        None => Ok(()),
    }
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("output types serialize");
    s.push('\n');
    write_file(path, s)
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&raw).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}
