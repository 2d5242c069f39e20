use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use privrec::datasets::{Attribute, DatasetKind};
use privrec::eval::Method;

#[derive(Parser, Debug)]
#[command(name = "privrec", version, about = "Fair recommendations on top of an opaque top-K provider")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "PRIVREC_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert a raw corpus into the processed directory format.
    Prepare(PrepareArgs),
    /// Print one recommendation list.
    Recommend(RecommendArgs),
    /// Run the trade-off and sensitivity sweeps.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct PrepareArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: DatasetKind,
    /// Raw data file or directory.
    #[arg(long)]
    pub raw: PathBuf,
    /// Processed output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Write the directory even when counts differ from the published ones.
    #[arg(long)]
    pub skip_audit: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProviderKind {
    Cosine,
    Bpr,
    Knn,
}

impl ProviderKind {
    pub fn name(self) -> &'static str {
        match self {
            ProviderKind::Cosine => "cosine",
            ProviderKind::Bpr => "bpr",
            ProviderKind::Knn => "knn",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Processed dataset directory (see `prepare`).
    #[arg(long)]
    pub data: PathBuf,
    /// Defaults to knn for Adult and cosine otherwise.
    #[arg(long, value_enum)]
    pub provider: Option<ProviderKind>,
    /// Defaults to sex for Adult and popularity otherwise.
    #[arg(long, value_parser = parse_attribute)]
    pub attribute: Option<Attribute>,
    #[arg(long, default_value_t = 10)]
    pub topk: usize,
    #[arg(long = "damping-c", default_value_t = 0.01)]
    pub damping: f64,
    #[arg(long = "ppr-L", default_value_t = 10)]
    pub ppr_steps: usize,
    #[arg(long = "walk-Lmax", default_value_t = 100)]
    pub walk_max_len: usize,
    /// Stop after this many provider calls.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub bpr_dims: usize,
    #[arg(long, default_value_t = 0.01)]
    pub bpr_lr: f64,
    #[arg(long, default_value_t = 0.01)]
    pub bpr_reg: f64,
    #[arg(long, default_value_t = 100)]
    pub bpr_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub bpr_seed: u64,
    /// Output directory for manifests and CSVs.
    #[arg(long, env = "PRIVREC_OUT_DIR", default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Source item, by its raw id (row number for Adult).
    pub source: String,
    #[arg(long, value_parser = parse_method, default_value = "privaterank")]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub tau: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exclude this user's items (raw user id).
    #[arg(long)]
    pub user: Option<String>,
    /// Edge file caching the crawled network; built and written when absent.
    #[arg(long)]
    pub network_cache: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma-separated tau grid; defaults to 0..=K/|groups|.
    #[arg(long, value_delimiter = ',')]
    pub taus: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    pub walk_seeds: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    pub random_seed: u64,
    /// Seed for the split shuffle when timestamps are missing.
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    /// Number of sampled sources for feature datasets.
    #[arg(long, default_value_t = 2000)]
    pub sources: usize,
    #[arg(long, default_value_t = 0)]
    pub source_seed: u64,
    /// Evaluate every source of a feature dataset instead of a sample.
    #[arg(long)]
    pub full: bool,
    /// Keep users' history items eligible for recommendation.
    #[arg(long)]
    pub include_history: bool,
    #[arg(long)]
    pub no_sensitivity: bool,
}

fn parse_kind(s: &str) -> Result<DatasetKind, String> {
    s.parse().map_err(|e: privrec::Error| e.to_string())
}

fn parse_attribute(s: &str) -> Result<Attribute, String> {
    s.parse().map_err(|e: privrec::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: privrec::Error| e.to_string())
}
