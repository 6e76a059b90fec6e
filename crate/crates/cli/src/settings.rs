//! Run configuration: a TOML file merged under command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    Linear,
    Forest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotChoice {
    /// 1D PD curve over the prediction scatter.
    Overlay,
    /// Predictions against PD at the observations.
    Match,
    /// Observations in two subset columns colored by PD.
    Pd2d,
    /// Observations in two subset columns colored by PD minus prediction.
    Residual,
    /// Grid of pairwise 2D PD scatters with 1D curves on the diagonal.
    Matrix,
}

/// Every setting a run may use. Unset fields fall back to per-command
/// defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categorical: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drop_incomplete: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipe_cmd: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipe_batch: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipe_timeout_secs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trees: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_try: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_leaf: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subset: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub background: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_sd: Option<f64>,
}

impl Settings {
    pub fn load(path: &Path) -> Result<Settings, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`; list fields replace
    /// when nonempty.
    pub fn overlay(mut self, over: Settings) -> Settings {
        macro_rules! take {
            ($($field:ident),*) => {$(
                if over.$field.is_some() {
                    self.$field = over.$field;
                }
            )*};
        }
        take!(
            data,
            target,
            drop_incomplete,
            model,
            pipe_cmd,
            pipe_batch,
            pipe_timeout_secs,
            fit,
            trees,
            m_try,
            min_leaf,
            max_depth,
            bootstrap,
            background,
            seed,
            threads,
            out,
            max_steps,
            min_gain,
            plot,
            grid,
            width,
            height,
            n,
            a,
            b,
            noise_sd
        );
        if !over.categorical.is_empty() {
            self.categorical = over.categorical;
        }
        if !over.subset.is_empty() {
            self.subset = over.subset;
        }
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn require_data(&self) -> Result<&Path, CliError> {
        self.data
            .as_deref()
            .ok_or_else(|| CliError::Usage("--data is required".into()))
    }

    pub fn require_out(&self) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage("--out is required".into()))
    }

    /// Subset specs split into column-name lists; every `--subset` value is
    /// one subset with comma-separated members.
    pub fn subsets(&self) -> Result<Vec<Vec<String>>, CliError> {
        self.subset
            .iter()
            .map(|s| {
                let names: Vec<String> = s.split(',').map(|n| n.trim().to_string()).collect();
                if names.iter().any(String::is_empty) {
                    Err(CliError::Usage(format!("malformed --subset `{s}`")))
                } else {
                    Ok(names)
                }
            })
            .collect()
    }
}
