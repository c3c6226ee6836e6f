use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use multisol::algorithms::TiebreakMode;
use multisol::evaluation::ReuseDenominator;
use multisol::samplers::{Method, SamplerConfig};
use multisol::Task;

#[derive(Debug, Parser)]
#[command(
    name = "multisol",
    version,
    about = "Multiple-solution DFS and Bellman-Ford: graphs, distributions, samplers and studies"
)]
pub struct Cli {
    /// Worker threads; outputs are identical for any value.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Generate random graphs.
    Gen(GenArgs),
    /// Build one parent distribution per graph from randomized reruns.
    Dist(DistArgs),
    /// Draw candidate solutions from distributions.
    Sample(SampleArgs),
    /// Check solutions and print `index,valid,failed_tags` lines.
    Check(CheckArgs),
    /// Evaluation studies that write CSV tables.
    #[command(subcommand)]
    Study(Study),
    /// Rerun the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tiebreak {
    Global,
    PerNode,
}

impl From<Tiebreak> for TiebreakMode {
    fn from(t: Tiebreak) -> Self {
        match t {
            Tiebreak::Global => TiebreakMode::PerRunGlobalShuffle,
            Tiebreak::PerNode => TiebreakMode::PerNodeShuffle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistChoice {
    Empirical,
    Perturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Denominator {
    Union,
    First,
}

impl From<Denominator> for ReuseDenominator {
    fn from(d: Denominator) -> Self {
        match d {
            Denominator::Union => ReuseDenominator::Union,
            Denominator::First => ReuseDenominator::First,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenArgs {
    #[arg(long)]
    pub task: Task,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Edge probability.
    #[arg(long = "p", default_value_t = 0.5)]
    pub edge_probability: f64,
    /// Weight set for Bellman-Ford graphs.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub weights: Vec<u64>,
    /// Keep integer weights instead of dividing by the largest.
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long)]
    pub seed: u64,
    #[arg(short = 'o', long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DistArgs {
    /// Graph file.
    #[arg(short = 'i', long)]
    pub input: PathBuf,
    /// Defaults to `bf` for graphs with a source, `dfs` otherwise.
    #[arg(long)]
    pub task: Option<Task>,
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    /// Mix each distribution with random noise of this weight.
    #[arg(long)]
    pub perturb: Option<f64>,
    #[arg(long, value_enum, default_value_t = Tiebreak::Global)]
    pub tiebreak: Tiebreak,
    #[arg(long)]
    pub seed: u64,
    #[arg(short = 'o', long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SamplerKnobs {
    #[arg(long, default_value_t = 3)]
    pub beam_width: usize,
    #[arg(long, default_value_t = 3)]
    pub beam_branch: usize,
    #[arg(long, default_value_t = 5)]
    pub greedy_samples: usize,
    #[arg(long, default_value_t = 10)]
    pub greedy_resamples: usize,
}

impl SamplerKnobs {
    pub fn config(&self, method: Method, seed: u64) -> SamplerConfig {
        SamplerConfig {
            method,
            beam_width: self.beam_width,
            beam_branch: self.beam_branch,
            greedy_parent_samples: self.greedy_samples,
            greedy_max_resamples: self.greedy_resamples,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SampleArgs {
    #[arg(short = 'g', long)]
    pub graphs: PathBuf,
    #[arg(short = 'd', long)]
    pub dists: PathBuf,
    #[arg(long)]
    pub task: Option<Task>,
    /// argmax|upwards|alt-upwards|beam|greedy|random
    #[arg(long)]
    pub method: Method,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub knobs: SamplerKnobs,
    #[arg(long)]
    pub seed: u64,
    #[arg(short = 'o', long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CheckArgs {
    #[arg(short = 'g', long)]
    pub graphs: PathBuf,
    /// Solutions file written by `sample`.
    #[arg(short = 's', long)]
    pub solutions: PathBuf,
    #[arg(long)]
    pub task: Option<Task>,
    /// Write the verdict lines here instead of stdout.
    #[arg(short = 'o', long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "study", rename_all = "kebab-case")]
pub enum Study {
    /// KL divergence between distributions built from different rerun counts.
    Reruns(RerunsArgs),
    /// Cumulative unique valid solutions per sample index.
    Coverage(StudyArgs),
    /// Mean edge reuse per sample index.
    EdgeReuse(EdgeReuseArgs),
    /// Uniques and valids per batch of samples, per method.
    Table1(StudyArgs),
    /// Single-sample accuracy, per method.
    Table2(StudyArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RerunsArgs {
    #[arg(long, default_value_t = Task::Dfs)]
    pub task: Task,
    /// Graph sizes [default: 5 to 64].
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 100)]
    pub graphs_per_size: usize,
    #[arg(long, value_delimiter = ',', default_value = "20,50,100")]
    pub counts: Vec<usize>,
    #[arg(long = "p", default_value_t = 0.5)]
    pub edge_probability: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(short = 'o', long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct StudyArgs {
    #[arg(long)]
    pub task: Task,
    #[arg(long)]
    pub n: usize,
    /// Graphs per run [default: 10 for curves, 50 for tables].
    #[arg(long)]
    pub graph_count: Option<usize>,
    /// Samples per graph [default: 25 for curves, 5 for tables].
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub runs: usize,
    /// Algorithm reruns behind each empirical distribution.
    #[arg(long, default_value_t = 20)]
    pub reruns: usize,
    #[arg(long, value_enum, default_value_t = DistChoice::Empirical)]
    pub dist: DistChoice,
    /// Noise weight for `--dist perturbed`.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "p", default_value_t = 0.5)]
    pub edge_probability: f64,
    /// Methods to report [default: the task's methods].
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[arg(long, value_enum, default_value_t = Tiebreak::Global)]
    pub tiebreak: Tiebreak,
    #[command(flatten)]
    #[serde(flatten)]
    pub knobs: SamplerKnobs,
    /// Evaluate on the graphs in this file instead of generating them.
    #[arg(long, conflicts_with = "end_to_end")]
    pub graphs: Option<PathBuf>,
    /// Generate graphs and distributions in memory (the default).
    #[arg(long)]
    pub end_to_end: bool,
    #[arg(long)]
    pub seed: u64,
    #[arg(short = 'o', long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EdgeReuseArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub study: StudyArgs,
    #[arg(long, value_enum, default_value_t = Denominator::Union)]
    pub denominator: Denominator,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write the primary output here instead of the recorded path.
    #[arg(short = 'o', long)]
    pub out: Option<PathBuf>,
}
