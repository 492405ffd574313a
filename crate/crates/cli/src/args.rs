use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "repcite",
    version,
    about = "Reputable-citation scoring pipeline"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate entity files and write a normalized dump.
    Ingest(IngestArgs),
    /// Pull works and citations for a journal list from OpenAlex.
    Fetch(FetchArgs),
    /// Build the institutional prestige table from ranking sources.
    Prestige(PrestigeArgs),
    /// Compute converged journal scores.
    Solve(SolveArgs),
    /// Compute author RC scores and attenuation flags.
    Score(ScoreArgs),
    /// Split scored authors into three RC tiers.
    Segment(SegmentArgs),
    /// Summary tables, statistical tests and plot data.
    Report(ReportArgs),
    /// Generate a synthetic network with planted elites and cartels.
    Synth(SynthArgs),
}

/// Entity inputs. `--data` points at a directory with the default file
/// names; explicit paths override it.
#[derive(Debug, Clone, Args, Default)]
pub struct DataArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub journals: Option<PathBuf>,
    #[arg(long)]
    pub works: Option<PathBuf>,
    #[arg(long)]
    pub edges: Option<PathBuf>,
    #[arg(long)]
    pub institutions: Option<PathBuf>,
    /// Only works published in this year count towards journal scores.
    #[arg(long)]
    pub census_year: Option<i32>,
}

/// Prestige inputs: ranking files (or directories of them), or a
/// precomputed table.
#[derive(Debug, Clone, Args, Default)]
pub struct RankingArgs {
    #[arg(long, num_args = 1..)]
    pub rankings: Vec<PathBuf>,
    /// Precomputed `institution_id,prestige` table; replaces --rankings.
    #[arg(long, conflicts_with = "rankings")]
    pub prestige: Option<PathBuf>,
}

/// Solver flags, named after the configuration fields.
#[derive(Debug, Clone, Args, Default)]
pub struct SolverArgs {
    /// `key = value` file applied before the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "true|false")]
    pub use_institutional_prestige: Option<String>,
    #[arg(long, value_name = "include|exclude")]
    pub exogenous: Option<String>,
    #[arg(long, value_name = "mean|max")]
    pub affiliation_combine: Option<String>,
    #[arg(long)]
    pub scale_min: Option<String>,
    #[arg(long)]
    pub scale_max: Option<String>,
    #[arg(long)]
    pub tolerance: Option<String>,
    #[arg(long)]
    pub max_iterations: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, num_args = 1..)]
    pub rankings: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FetchArgs {
    /// OpenAlex source ids, e.g. S137773608.
    #[arg(long = "source", num_args = 1.., required = true)]
    pub sources: Vec<String>,
    #[arg(long)]
    pub census_year: i32,
    #[arg(long, default_value_t = 5.0)]
    pub rate_limit: f64,
    #[arg(long, default_value_t = 200)]
    pub per_page: u32,
    #[arg(long)]
    pub cursor: Option<String>,
    #[arg(long)]
    pub mailto: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PrestigeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, num_args = 1.., required = true)]
    pub rankings: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub ranking: RankingArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub ranking: RankingArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// `author_id,label` file.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Drop citations between works sharing an author.
    #[arg(long)]
    pub exclude_self_citations: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SegmentArgs {
    /// Author scores written by `score`.
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Tier only the labelled authors.
    #[arg(long, requires = "labels")]
    pub labelled_only: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub ranking: RankingArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Length of the journal/institution/country share lists.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub journal_count: Option<usize>,
    #[arg(long)]
    pub exogenous_journal_count: Option<usize>,
    #[arg(long)]
    pub works_per_journal: Option<usize>,
    #[arg(long)]
    pub author_pool: Option<usize>,
    #[arg(long)]
    pub institution_pool: Option<usize>,
    #[arg(long)]
    pub prestige_profile: Option<f64>,
    #[arg(long)]
    pub honest_elite_size: Option<usize>,
    #[arg(long)]
    pub cartel_size: Option<usize>,
    #[arg(long)]
    pub cartel_citation_boost: Option<usize>,
    #[arg(long)]
    pub base_citation_rate: Option<f64>,
    #[arg(long)]
    pub ranking_sources: Option<usize>,
    #[arg(long)]
    pub census_year: Option<i32>,
    #[arg(long)]
    pub out: PathBuf,
}
