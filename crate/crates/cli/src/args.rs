use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kgfc_core::{Closure, Directedness};
use serde::Serialize;

pub const SNAPSHOT_DIR_ENV: &str = "KGFC_SNAPSHOT_DIR";
pub const SERVER_ENV: &str = "KGFC_SERVER";
pub const DEFAULT_SNAPSHOT: &str = "graph.vkg";

#[derive(Debug, Parser)]
#[command(name = "kgfc", version, about = "Fact checking over knowledge graphs by semantic proximity")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Base URL of a running kgfc service. Without it an embedded service
    /// is started for the duration of the command.
    #[arg(long, global = true, env = SERVER_ENV)]
    #[serde(skip)]
    pub server: Option<String>,
    /// Worker threads for the embedded service (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Log filter, e.g. `info` or `kgfc_core=debug`.
    #[arg(long, global = true, default_value = "warn")]
    pub log: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest triple files and write a graph snapshot plus an ingestion report.
    Build(BuildArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Compute the truth value of one statement.
    Check(CheckArgs),
    /// Score a statement matrix and its ROC curve.
    EvalMatrix(EvalMatrixArgs),
    /// Correlate truth values with an annotated statement corpus.
    EvalCorpus(EvalCorpusArgs),
    /// Cross-validated classification from truth-value features.
    Calibrate(CalibrateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Build(_) => "build",
            Command::Serve(_) => "serve",
            Command::Check(_) => "check",
            Command::EvalMatrix(_) => "eval-matrix",
            Command::EvalCorpus(_) => "eval-corpus",
            Command::Calibrate(_) => "calibrate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureArg {
    Metric,
    Ultrametric,
    DirectOnly,
}

impl From<ClosureArg> for Closure {
    fn from(c: ClosureArg) -> Self {
        match c {
            ClosureArg::Metric => Closure::Metric,
            ClosureArg::Ultrametric => Closure::Ultrametric,
            ClosureArg::DirectOnly => Closure::DirectOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewArg {
    Directed,
    Undirected,
}

impl From<ViewArg> for Directedness {
    fn from(v: ViewArg) -> Self {
        match v {
            ViewArg::Directed => Directedness::Directed,
            ViewArg::Undirected => Directedness::Undirected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OnParseError {
    Skip,
    Abort,
}

#[derive(Debug, Args, Serialize)]
pub struct SnapshotArg {
    /// Graph snapshot. Relative paths that do not exist are looked up in
    /// $KGFC_SNAPSHOT_DIR.
    #[arg(long, short = 'g', default_value = DEFAULT_SNAPSHOT)]
    pub snapshot: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ResolveArgs {
    /// Retry unmatched names ignoring ASCII case.
    #[arg(long)]
    pub case_insensitive: bool,
    /// Match names exactly, without the DBpedia prefix fallback.
    #[arg(long)]
    pub exact_names: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct BuildArgs {
    /// N-Triples (.nt, .nt.gz) or tab-separated edge lists (.tsv, .tsv.gz).
    #[arg(required = true)]
    pub sources: Vec<PathBuf>,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    /// Keep edge direction (subject to object).
    #[arg(long, conflicts_with = "undirected")]
    pub directed: bool,
    /// Symmetric edges (the default).
    #[arg(long)]
    pub undirected: bool,
    /// Allowed IRI prefix; repeatable. Defaults to the DBpedia resource and
    /// ontology namespaces.
    #[arg(long = "namespace")]
    pub namespaces: Vec<String>,
    /// Keep triples from any namespace.
    #[arg(long, conflicts_with = "namespaces")]
    pub all_namespaces: bool,
    #[arg(long, value_enum, default_value = "skip")]
    pub on_parse_error: OnParseError,
    /// Ingestion report path (default: `<out>.report.json`).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub listen: SocketAddr,
    /// Snapshots to load at startup; repeatable.
    #[arg(long = "snapshot", short = 'g')]
    pub snapshots: Vec<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    pub subject: String,
    pub object: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub snapshot: SnapshotArg,
    #[arg(long, value_enum, default_value = "metric")]
    pub closure: ClosureArg,
    /// Graph view; defaults to the snapshot's own directedness.
    #[arg(long, value_enum)]
    pub view: Option<ViewArg>,
    /// Remove the statement's own edge before searching.
    #[arg(long)]
    pub exclude_existing: bool,
    /// Print a JSON report instead of text.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub resolve: ResolveArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalMatrixArgs {
    /// CSV with columns subject,object,is_true[,subject_group,object_group].
    #[arg(long)]
    pub statements: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub snapshot: SnapshotArg,
    #[arg(long, value_enum, default_value = "metric")]
    pub closure: ClosureArg,
    #[arg(long, value_enum)]
    pub view: Option<ViewArg>,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub resolve: ResolveArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalCorpusArgs {
    /// Tab-separated annotated corpus.
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub snapshot: SnapshotArg,
    #[arg(long, value_enum, default_value = "metric")]
    pub closure: ClosureArg,
    #[arg(long, value_enum)]
    pub view: Option<ViewArg>,
    /// Statements whose subject has at most this degree are skipped.
    #[arg(long, default_value_t = kgfc_core::evaluation::DEFAULT_MIN_SUBJECT_DEGREE)]
    pub min_subject_degree: u32,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub resolve: ResolveArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    /// CSV with columns entity_name,label[,group].
    #[arg(long)]
    pub roster: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub snapshot: SnapshotArg,
    /// Concept whose neighbours become the feature columns.
    #[arg(long, default_value = kgfc_core::calibration::DEFAULT_TARGET_CONCEPT)]
    pub targets: String,
    /// Run all four closure x directedness cells.
    #[arg(long)]
    pub grid: bool,
    /// Closure of the single cell when --grid is absent.
    #[arg(long, value_enum, default_value = "metric")]
    pub closure: ClosureArg,
    /// Directedness of the single cell when --grid is absent.
    #[arg(long, value_enum, default_value = "undirected")]
    pub view: ViewArg,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Also classify from direct edges only.
    #[arg(long)]
    pub infobox_baseline: bool,
    /// Minimum share of roster entries that must resolve.
    #[arg(long, default_value_t = kgfc_core::calibration::DEFAULT_MIN_RESOLVED_FRACTION)]
    pub min_resolved: f64,
    #[arg(long, short = 'o')]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub resolve: ResolveArgs,
}
