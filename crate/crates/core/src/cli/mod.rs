//! Command-line front end. Every command reads its inputs from files and
//! writes its results under the output directory, so commands can be chained
//! across separate invocations.
//!
//! Exit codes: 0 success, 2 input error, 3 empty result, 4 missing
//! prerequisite artifact, 5 invalid configuration.

mod artifacts;
mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "dyntopic", version, about = "Two-stage dynamic topic analysis")]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand; they override config-file values.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file with run settings.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long = "k-min", global = true, value_name = "N")]
    pub k_min: Option<usize>,
    #[arg(long = "k-max", global = true, value_name = "N")]
    pub k_max: Option<usize>,
    /// Comma-separated sparsity ratios for the stability experiment.
    #[arg(long, global = true, value_delimiter = ',', value_name = "VALUES")]
    pub l: Option<Vec<f64>>,
    #[arg(long, global = true, value_name = "DIR")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize a corpus and write the vocabulary and per-window TF-IDF matrices.
    Ingest {
        /// Corpus file (.jsonl or .csv); overrides `input_path`.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// Fit window models and the dynamic model.
    Fit {
        /// Word vectors for TC-W2V; overrides `embeddings_path`.
        #[arg(long, value_name = "PATH")]
        embeddings: Option<PathBuf>,
    },
    /// Refine the fitted dynamic model with convex NMF.
    Refine,
    /// Measure ranking stability under sparse perturbations of the window models.
    Stability {
        #[arg(long, value_name = "PATH")]
        embeddings: Option<PathBuf>,
    },
    /// Score externally supplied topics (one per line, space-separated terms).
    Evaluate {
        #[arg(long, value_name = "PATH")]
        topics: PathBuf,
        #[arg(long, value_enum, default_value_t = MetricChoice::All)]
        metric: MetricChoice,
        #[arg(long, value_name = "PATH")]
        embeddings: Option<PathBuf>,
    },
    /// Write a synthetic corpus with planted topics and matching word vectors.
    GenSynthetic {
        /// Plant a topic that appears only in the final window.
        #[arg(long)]
        emerging: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricChoice {
    TcW2v,
    CUmass,
    All,
}

/// A failure with its process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn empty(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    pub fn missing(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 5,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::MissingField { .. }
            | Error::DuplicateId(_)
            | Error::NegativeEntry { .. }
            | Error::Shape(_) => 2,
            Error::EmptyVocabulary { .. } | Error::Empty(_) => 3,
            Error::RankOutOfRange { .. } | Error::Config(_) => 5,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 5 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(messages) => {
            for m in messages {
                eprintln!("{m}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

/// Runs a parsed command. Returns the warnings and notes it produced.
pub fn execute(cli: &Cli) -> Result<Vec<String>, CliError> {
    let config = RunConfig::resolve(&cli.flags)?;
    match &cli.command {
        Command::Ingest { input } => commands::ingest(&config, input.as_deref()),
        Command::Fit { embeddings } => commands::fit(&config, embeddings.as_deref()),
        Command::Refine => commands::refine(&config),
        Command::Stability { embeddings } => commands::stability(&config, embeddings.as_deref()),
        Command::Evaluate {
            topics,
            metric,
            embeddings,
        } => commands::evaluate(&config, topics, *metric, embeddings.as_deref()),
        Command::GenSynthetic { emerging } => commands::gen_synthetic(&config, *emerging),
    }
}
