use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "citecascade", version)]
#[command(about = "Build literature datasets by cascading citation expansion and compare their co-citation maps")]
pub struct Cli {
    /// Session directory holding the store, datasets, networks and reports
    #[arg(long, short = 'S', env = "CITECASCADE_SESSION", default_value = "citecascade-session", global = true)]
    pub session: PathBuf,

    /// Log progress to stderr (repeat for more detail)
    #[arg(long, short, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load bibliographic records into the session store
    Ingest(IngestArgs),
    /// Attach abstracts from a JSONL file of {id | title+year, abstract}
    Enrich(EnrichArgs),
    /// Create a dataset from a phrase search over the store
    Search(SearchArgs),
    /// Create a dataset by cascading citation expansion from seed articles
    Expand(ExpandArgs),
    /// Create a dataset as the union of existing datasets
    Union(UnionArgs),
    /// Build the document co-citation network of a dataset
    Network(NetworkArgs),
    /// Cluster a network, label clusters and build concept trees
    Cluster(ClusterArgs),
    /// Compare datasets: overlap matrix and coverage of the base network's clusters
    Compare(CompareArgs),
    /// Draw maps, overlays and year distributions as SVG/HTML
    Render(RenderArgs),
    /// Print a summary table (datasets, overlap, networks, coverage)
    Report(ReportArgs),
    /// Write a deterministic synthetic corpus as JSONL
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Input file
    pub input: PathBuf,
    /// `jsonl` or `dimensions-csv`; inferred from the extension when omitted
    #[arg(long, short)]
    pub format: Option<String>,
}

#[derive(Args, Debug)]
pub struct EnrichArgs {
    /// JSONL enrichment file
    pub input: PathBuf,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Name of the resulting dataset
    #[arg(long, short)]
    pub name: String,
    /// Phrase to match (repeat for OR)
    #[arg(long = "phrase", short, required = true)]
    pub phrases: Vec<String>,
    /// `fulltext` (title+abstract proxy), `title-abstract` or `id`
    #[arg(long, default_value = "title-abstract")]
    pub kind: String,
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    /// Name of the resulting dataset
    #[arg(long, short)]
    pub name: String,
    /// Expansion spec JSON: {seeds, stages:[{dir,gens}], theta_citer, theta_ref, cap?}
    #[arg(long, conflicts_with_all = ["seeds", "stages"])]
    pub spec: Option<PathBuf>,
    /// Seed article id (repeatable)
    #[arg(long = "seed")]
    pub seeds: Vec<String>,
    /// Stages applied left to right, e.g. `F:3` or `F:1,B:1`
    #[arg(long)]
    pub stages: Option<String>,
    /// Minimum citation count of an admitted citer [default: session config]
    #[arg(long)]
    pub theta_citer: Option<u64>,
    /// Minimum citation count of an admitted reference [default: session config]
    #[arg(long)]
    pub theta_ref: Option<u64>,
    /// Maximum additions per generation (most cited first)
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Args, Debug)]
pub struct UnionArgs {
    /// Name of the resulting dataset
    #[arg(long, short)]
    pub name: String,
    /// Comma-separated input dataset names
    #[arg(long, value_delimiter = ',', required = true)]
    pub datasets: Vec<String>,
}

#[derive(Args, Debug)]
pub struct NetworkArgs {
    /// Dataset to build the network from
    #[arg(long, short)]
    pub dataset: String,
    /// Link-to-node ratio for pruning [default: session config, 4]
    #[arg(long)]
    pub lrf: Option<f64>,
    /// Look-back years, or `none` for unlimited [default: session config, 10]
    #[arg(long)]
    pub lby: Option<String>,
    /// Most-cited citers kept per time slice [default: session config, 100]
    #[arg(long)]
    pub top_n: Option<usize>,
    /// Minimum citation count of a citer [default: session config, 1]
    #[arg(long)]
    pub min_citations: Option<u64>,
    /// Years per time slice [default: session config, 1]
    #[arg(long)]
    pub slice_years: Option<u32>,
    /// Prune each slice before merging instead of pruning once
    #[arg(long)]
    pub per_slice_pruning: bool,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    /// Network (dataset name) to cluster
    #[arg(long, short)]
    pub network: String,
    /// 2 also sub-clusters the top clusters
    #[arg(long, default_value_t = 1)]
    pub levels: u8,
    /// Number of top clusters to drill into [default: session config, 5]
    #[arg(long)]
    pub top_k: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Comma-separated dataset names to compare
    #[arg(long, value_delimiter = ',', required = true)]
    pub datasets: Vec<String>,
    /// Dataset whose clustered network serves as the base map
    #[arg(long)]
    pub base: String,
    /// Coverage below this fraction counts as missed [default: session config, 0.10]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Coverage of at least 1 - epsilon counts as full [default: session config, 0.05]
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// `map`, `overlay` or `distribution`
    pub kind: String,
    /// Network to draw (for `map`)
    #[arg(long, short)]
    pub network: Option<String>,
    /// Comma-separated datasets (for `distribution`)
    #[arg(long, value_delimiter = ',')]
    pub datasets: Vec<String>,
    /// Plot ln(1 + count) (for `distribution`)
    #[arg(long)]
    pub log: bool,
    /// Layout seed [default: session config, 42]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// `datasets`, `overlap`, `networks`, `coverage` or `trace`
    #[arg(long, short)]
    pub kind: String,
    /// Dataset name (for `trace`)
    #[arg(long, short)]
    pub name: Option<String>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output JSONL file
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub articles: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}
