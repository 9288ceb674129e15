//! `lostpage`: recommend archived pages for a lost URI, and the tooling around
//! it (ontology ingestion, training, evaluation, access-log analysis).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lostpage_core::archive::ArchiveError;
use lostpage_core::deep::DeepError;
use lostpage_core::nb::NbError;
use lostpage_core::ontology::OntologyError;

use crate::config::ConfigError;

/// Exit status when a recommendation run finds nothing to recommend.
pub const EXIT_EMPTY: u8 = 2;
/// Exit status for bad flags, config values or inputs.
pub const EXIT_CONFIG: u8 = 3;
/// Exit status for file or network failures.
pub const EXIT_IO: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "lostpage",
    version,
    about = "Recommend archived web pages for a URI that no longer resolves"
)]
pub struct Cli {
    /// Config file of `key = value` lines (flags override it; it overrides LOSTPAGE_* variables).
    #[arg(long, global = true, env = "LOSTPAGE_CONFIG")]
    pub config: Option<PathBuf>,
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse an ontology dump and save the filtered index.
    Ingest(IngestArgs),
    /// Train the first-level model and the category vectors.
    Train(TrainArgs),
    /// Recommend archived pages for a URI.
    Recommend(Box<RecommendArgs>),
    /// Cross-validate first-level classification.
    EvaluateL1(EvaluateL1Args),
    /// Hold out part of the ontology and score deep classification per level.
    EvaluateDeep(EvaluateDeepArgs),
    /// Filter access logs and report on the surviving request URIs.
    AnalyzeLogs(AnalyzeLogsArgs),
    /// Report TLD, depth, pattern, dictionary and category statistics of an ontology.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DumpFormat {
    Tsv,
    Rdf,
}

impl std::str::FromStr for DumpFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Records,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// Where the ontology comes from: a saved index or a raw dump.
#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Directory written by `ingest`.
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Raw dump to ingest on the fly.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Format of `--corpus` (tsv or rdf); guessed from the extension when absent.
    #[arg(long)]
    pub format: Option<DumpFormat>,
    /// Keep every top-level category except the excluded ones.
    #[arg(long)]
    pub any_top_level: bool,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Output directory for the saved index.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Output directory for `first_level.nb` and `vectors.txt`.
    #[arg(long)]
    pub out: PathBuf,
    /// Deep-stage gram scheme: 3 or all.
    #[arg(long)]
    pub grams: Option<String>,
    /// First-level token method.
    #[arg(long)]
    pub method: Option<String>,
    /// First-level variants, comma separated (strip-tld, strip-numbers, strip-stopwords, none).
    #[arg(long)]
    pub variants: Option<String>,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    /// The lost URI (may also be given positionally).
    #[arg(long)]
    pub uri: Option<String>,
    #[arg(value_name = "URI")]
    pub positional_uri: Option<String>,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Directory written by `train`; the models are trained on the fly otherwise.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Desired datetime (ISO-8601 date or date-time, UTC when no offset).
    #[arg(long)]
    pub datetime: Option<String>,
    /// Number of recommendations.
    #[arg(long)]
    pub top: Option<usize>,
    /// Ranking weights `t,p,s,q`, summing to 1.
    #[arg(long)]
    pub weights: Option<String>,
    /// Deep-stage gram scheme: 3 or all.
    #[arg(long)]
    pub grams: Option<String>,
    /// Use the temporal distance verbatim instead of one minus it.
    #[arg(long)]
    pub temporal_literal: bool,
    /// Recorded evidence: `timemaps/`, `popularity.tsv`, `damage.tsv`, `wikipedia.jsonl`.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
    /// Memento aggregator base URL (needs the `live` build feature).
    #[arg(long)]
    pub aggregator: Option<String>,
    /// Damage service base URL (needs the `live` build feature).
    #[arg(long)]
    pub damage_service: Option<String>,
    /// Secondary ontology file (JSON lines); defaults to `<fixtures>/wikipedia.jsonl`.
    #[arg(long)]
    pub wikipedia: Option<PathBuf>,
    /// Evidence cache file (JSON lines).
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Cache entry lifetime in seconds.
    #[arg(long)]
    pub cache_max_age: Option<i64>,
    /// Per-request network timeout in seconds.
    #[arg(long)]
    pub timeout: Option<u64>,
    /// Concurrent evidence fetches.
    #[arg(long)]
    pub parallelism: Option<usize>,
    /// TimeMap pages read per candidate.
    #[arg(long)]
    pub max_pages: Option<usize>,
    /// Candidate categories examined by the deep stage.
    #[arg(long)]
    pub candidates: Option<usize>,
    /// Override "now" (ISO-8601), for reproducible runs.
    #[arg(long)]
    pub now: Option<String>,
    #[arg(long)]
    pub output: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct EvaluateL1Args {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Token method; ignored with `--all`.
    #[arg(long)]
    pub method: Option<String>,
    /// Variants, comma separated; ignored with `--all`.
    #[arg(long)]
    pub variants: Option<String>,
    /// Evaluate every method and variant combination.
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Test items with features unseen in training: drop them or ignore the unseen features.
    #[arg(long, value_enum, default_value_t = OovArg::Drop)]
    pub oov: OovArg,
    #[arg(long)]
    pub output: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OovArg {
    Drop,
    Ignore,
}

#[derive(Debug, Args)]
pub struct EvaluateDeepArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Share of each category held out for testing.
    #[arg(long, default_value_t = 0.1)]
    pub holdout: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub grams: Option<String>,
    #[arg(long)]
    pub candidates: Option<usize>,
    #[arg(long)]
    pub output: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct AnalyzeLogsArgs {
    /// Access logs, plain or gzip.
    #[arg(required = true)]
    pub logs: Vec<PathBuf>,
    /// Write the surviving URIs here, one per line.
    #[arg(long)]
    pub survivors: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub output: Option<OutputFormat>,
}

/// Maps a failure to the documented exit status.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
        let io = match cause {
            c if c.is::<OntologyError>() => matches!(c.downcast_ref(), Some(OntologyError::Io(_))),
            c if c.is::<ArchiveError>() => matches!(
                c.downcast_ref(),
                Some(
                    ArchiveError::Io(_)
                        | ArchiveError::Fixture { .. }
                        | ArchiveError::Network(_)
                        | ArchiveError::Timeout(_)
                )
            ),
            c if c.is::<NbError>() => matches!(c.downcast_ref(), Some(NbError::Io(_))),
            c if c.is::<DeepError>() => matches!(c.downcast_ref(), Some(DeepError::Io(_))),
            _ => false,
        };
        if io {
            return EXIT_IO;
        }
    }
    EXIT_CONFIG
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
