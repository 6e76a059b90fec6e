use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::settings::{FitKind, PlotChoice, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "pdexplain",
    version,
    about = "Partial dependence plots and how much of a model they explain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic data set y = a·x1 + b·x2 + noise.
    Simulate(SimulateArgs),
    /// Fit a built-in model and save it as JSON.
    Fit(FitArgs),
    /// Explainability of single columns or given subsets.
    Explain(ExplainArgs),
    /// Greedy forward selection of the most explaining columns.
    Select(SelectArgs),
    /// Render partial dependence plots as SVG with CSV sidecars.
    Pdp(PdpArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Fit(_) => "fit",
            Command::Explain(_) => "explain",
            Command::Select(_) => "select",
            Command::Pdp(_) => "pdp",
        }
    }

    pub fn config_path(&self) -> Option<&PathBuf> {
        match self {
            Command::Simulate(a) => a.common.config.as_ref(),
            Command::Fit(a) => a.common.config.as_ref(),
            Command::Explain(a) => a.common.config.as_ref(),
            Command::Select(a) => a.common.config.as_ref(),
            Command::Pdp(a) => a.common.config.as_ref(),
        }
    }

    /// The flags given on the command line, as settings to lay over the
    /// config file.
    pub fn settings(&self) -> Settings {
        let mut s = Settings::default();
        match self {
            Command::Simulate(a) => {
                a.common.apply(&mut s);
                s.n = a.n;
                s.a = a.a;
                s.b = a.b;
                s.noise_sd = a.noise_sd;
            }
            Command::Fit(a) => {
                a.common.apply(&mut s);
                a.data.apply(&mut s);
                a.hyper.apply(&mut s);
                s.fit = a.fit;
            }
            Command::Explain(a) => {
                a.common.apply(&mut s);
                a.data.apply(&mut s);
                a.source.apply(&mut s);
                a.pd.apply(&mut s);
            }
            Command::Select(a) => {
                a.common.apply(&mut s);
                a.data.apply(&mut s);
                a.source.apply(&mut s);
                a.pd.apply(&mut s);
                s.max_steps = a.max_steps;
                s.min_gain = a.min_gain;
            }
            Command::Pdp(a) => {
                a.common.apply(&mut s);
                a.data.apply(&mut s);
                a.source.apply(&mut s);
                a.pd.apply(&mut s);
                s.plot = a.plot;
                s.grid = a.grid;
                s.width = a.width;
                s.height = a.height;
            }
        }
        s
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML file with default settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Root seed for all randomness.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file (simulate, fit) or directory (explain, select, pdp).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    fn apply(&self, s: &mut Settings) {
        s.seed = self.seed;
        s.threads = self.threads;
        s.out = self.out.clone();
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Response column, excluded from the features.
    #[arg(long)]
    pub target: Option<String>,
    /// Treat this column as categorical (repeatable).
    #[arg(long = "categorical", value_name = "COLUMN")]
    pub categorical: Vec<String>,
    /// Drop rows with missing values instead of rejecting the file.
    #[arg(long)]
    pub drop_incomplete: bool,
}

impl DataArgs {
    fn apply(&self, s: &mut Settings) {
        s.data = self.data.clone();
        s.target = self.target.clone();
        s.categorical = self.categorical.clone();
        s.drop_incomplete = self.drop_incomplete.then_some(true);
    }
}

#[derive(Debug, Args)]
pub struct HyperArgs {
    /// Number of trees in a forest.
    #[arg(long)]
    pub trees: Option<usize>,
    /// Columns tried per split (default max(p/3, 1)).
    #[arg(long)]
    pub m_try: Option<usize>,
    /// Minimum rows per leaf.
    #[arg(long)]
    pub min_leaf: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Grow every tree on all rows instead of a bootstrap resample.
    #[arg(long)]
    pub no_bootstrap: bool,
}

impl HyperArgs {
    fn apply(&self, s: &mut Settings) {
        s.trees = self.trees;
        s.m_try = self.m_try;
        s.min_leaf = self.min_leaf;
        s.max_depth = self.max_depth;
        if self.no_bootstrap {
            s.bootstrap = Some(false);
        }
    }
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Saved model JSON.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Shell command of an external model speaking the pipe protocol.
    #[arg(long)]
    pub pipe_cmd: Option<String>,
    /// Rows per batch sent to the external model.
    #[arg(long)]
    pub pipe_batch: Option<usize>,
    /// Seconds to wait for one batch of predictions.
    #[arg(long)]
    pub pipe_timeout_secs: Option<f64>,
    /// Fit a model of this kind on --data instead of loading one.
    #[arg(long, value_enum)]
    pub fit: Option<FitKind>,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

impl SourceArgs {
    fn apply(&self, s: &mut Settings) {
        s.model = self.model.clone();
        s.pipe_cmd = self.pipe_cmd.clone();
        s.pipe_batch = self.pipe_batch;
        s.pipe_timeout_secs = self.pipe_timeout_secs;
        s.fit = self.fit;
        self.hyper.apply(s);
    }
}

#[derive(Debug, Args)]
pub struct PdArgs {
    /// Comma-separated column names forming one subset (repeatable).
    #[arg(long)]
    pub subset: Vec<String>,
    /// Cap on background rows averaged over.
    #[arg(long)]
    pub background: Option<usize>,
}

impl PdArgs {
    fn apply(&self, s: &mut Settings) {
        s.subset = self.subset.clone();
        s.background = self.background;
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    /// Model kind.
    #[arg(long, value_enum)]
    pub fit: Option<FitKind>,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub pd: PdArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub pd: PdArgs,
    /// Stop after this many inclusions.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Stop when the best improvement in Υ is below this.
    #[arg(long)]
    pub min_gain: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PdpArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub pd: PdArgs,
    #[arg(long, value_enum)]
    pub plot: Option<PlotChoice>,
    /// Grid points per numeric column for PD curves.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
}
