use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ordkern::kernels::{AttributeKernel, KernelConfig, MatchMode};
use ordkern::learn::{TuningMode, DEFAULT_C_GRID, DEFAULT_LAMBDA_GRID};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "ordkern",
    version,
    about = "Ordinal-pattern graph kernels for weighted networks"
)]
pub struct Cli {
    /// Worker threads; all cores when unset. Never changes results.
    #[arg(long, env = "ORDKERN_THREADS", global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a labelled dataset of synthetic correlation networks.
    Gen(GenArgs),
    /// Compute a Gram matrix and its PSD diagnostic.
    Gram(GramArgs),
    /// Leave-one-out SVM evaluation with grid search.
    Eval(EvalArgs),
    /// Re-evaluate after deleting a fraction of every graph's edges.
    Robust(RobustArgs),
    /// Rank DOP prefixes that separate two classes.
    Mine(MineArgs),
    /// Repeat a run from its run_config.json.
    Rerun(RerunArgs),
}

/// A fully resolved command, as stored in `run_config.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Job {
    Gen(GenArgs),
    Gram(GramArgs),
    Eval(EvalArgs),
    Robust(RobustArgs),
    Mine(MineArgs),
}

impl Job {
    pub fn out_mut(&mut self) -> &mut PathBuf {
        match self {
            Job::Gen(a) => &mut a.out,
            Job::Gram(a) => &mut a.out,
            Job::Eval(a) => &mut a.out,
            Job::Robust(a) => &mut a.out,
            Job::Mine(a) => &mut a.out,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(flatten)]
    pub job: Job,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GenArgs {
    /// Graphs per class.
    #[arg(long)]
    pub classes: usize,
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub timepoints: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Planted node order of class +1 (default: the first five nodes).
    #[arg(long, value_delimiter = ',')]
    pub plant_a: Option<Vec<usize>>,
    /// Planted node order of class -1 (default: class +1 reversed).
    #[arg(long, value_delimiter = ',')]
    pub plant_b: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.8)]
    pub strength: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct KernelArgs {
    #[arg(long, default_value = "positional")]
    pub match_mode: MatchMode,
    /// one, linear, delta or rbf:<gamma>
    #[arg(long, default_value = "one")]
    pub node_kernel: AttributeKernel,
    /// one, linear, delta or rbf:<gamma>
    #[arg(long, default_value = "one")]
    pub edge_kernel: AttributeKernel,
    /// Scale to unit diagonal.
    #[arg(long)]
    pub normalize: bool,
}

impl KernelArgs {
    pub fn config(&self, lambda: f64) -> KernelConfig {
        KernelConfig {
            lambda,
            match_mode: self.match_mode,
            node_kernel: self.node_kernel,
            edge_kernel: self.edge_kernel,
            normalize: self.normalize,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GramArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
    /// Use the exact ordinal-pattern kernel instead of DOPs.
    #[arg(long)]
    pub exact: bool,
    /// Longest enumerated pattern (edges) for --exact.
    #[arg(long, default_value_t = 8)]
    pub depth_cap: usize,
    /// Maximum number of patterns per graph for --exact.
    #[arg(long, default_value_t = ordkern::ordinal::DEFAULT_BUDGET)]
    pub budget: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GridArgs {
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAMBDA_GRID)]
    pub lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_C_GRID)]
    pub cs: Vec<f64>,
    /// Pick (lambda, C) by plain LOOCV accuracy over the whole dataset
    /// instead of nested selection.
    #[arg(long)]
    pub paper_literal_tuning: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_updates: usize,
}

impl GridArgs {
    pub fn tuning(&self) -> TuningMode {
        if self.paper_literal_tuning {
            TuningMode::NonNested
        } else {
            TuningMode::Nested
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    /// Permute the labels with this seed first (control run).
    #[arg(long)]
    pub shuffle_labels: Option<u64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct RobustArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Missing-edge rates in [0, 1].
    #[arg(long, value_delimiter = ',', required = true)]
    pub rates: Vec<f64>,
    /// Number of perturbation seeds (0, 1, ...).
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct MineArgs {
    /// Dataset whose +1 graphs form class A and -1 graphs class B.
    #[arg(long, conflicts_with_all = ["class_a", "class_b"], required_unless_present = "class_a")]
    pub manifest: Option<PathBuf>,
    /// Folder of graph JSON files for class A.
    #[arg(long, requires = "class_b")]
    pub class_a: Option<PathBuf>,
    /// Folder of graph JSON files for class B.
    #[arg(long, requires = "class_a")]
    pub class_b: Option<PathBuf>,
    #[arg(long)]
    pub start_node: usize,
    #[arg(long, default_value_t = 6)]
    pub top_k: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RerunArgs {
    pub config: PathBuf,
    /// Write outputs here instead of the recorded directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
