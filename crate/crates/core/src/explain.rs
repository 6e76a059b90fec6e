//! Explainability of a model by a partial dependence function.
//!
//! `ASE(PD_s)` is the mean squared gap between the model's predictions and
//! `PD_s` at the observed rows; `ASE(PD_∅)` is the same gap for the
//! constant mean prediction. `Υ = 1 − ASE(PD_s) / ASE(PD_∅)` reads like an
//! R²: 1 when the PD reproduces the model, 0 for the constant, and
//! negative when the PD is further from the model than the constant is.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pdp::{checked_predict, BackgroundSet, PdEngine};
use crate::predictor::Predictor;
use crate::sum::Accumulator;
use crate::tabular::{format_f64, FeatureSubset};

/// `(1/n) Σ (f̂(x_i) − PD_s(x_i))²`.
pub fn ase(predictions: &[f64], pd_values: &[f64]) -> Result<f64> {
    if predictions.len() != pd_values.len() {
        return Err(Error::Arg(format!(
            "{} predictions but {} PD values",
            predictions.len(),
            pd_values.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Arg("ASE of an empty sample".into()));
    }
    if predictions.iter().chain(pd_values).any(|v| !v.is_finite()) {
        return Err(Error::Arg("ASE inputs must be finite".into()));
    }
    let acc: Accumulator = predictions
        .iter()
        .zip(pd_values)
        .map(|(f, pd)| (f - pd) * (f - pd))
        .collect();
    Ok(acc.total() / predictions.len() as f64)
}

/// `(1/n) Σ (f̂(x_i) − mean f̂)²`, the population variance of the predictions.
pub fn ase_null(predictions: &[f64]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::Arg("ASE of an empty sample".into()));
    }
    let mean = crate::sum::mean(predictions);
    ase(predictions, &vec![mean; predictions.len()])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainabilityReport {
    pub subset: FeatureSubset,
    pub columns: Vec<String>,
    pub ase_s: f64,
    pub ase_null: f64,
    pub upsilon: f64,
    pub background_size: usize,
    pub seed: Option<u64>,
}

impl ExplainabilityReport {
    pub fn label(&self) -> String {
        if self.columns.is_empty() {
            "∅".into()
        } else {
            self.columns.join("+")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub step: usize,
    pub column: usize,
    pub variable: String,
    pub upsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub steps: Vec<SelectionStep>,
    pub background_size: usize,
    pub seed: Option<u64>,
}

impl SelectionTrace {
    pub fn subset(&self) -> FeatureSubset {
        let indices = self.steps.iter().map(|s| s.column).collect::<Vec<_>>();
        let n = indices.iter().max().map_or(0, |m| m + 1);
        FeatureSubset::new(indices, n).expect("selected columns are distinct")
    }

    pub fn variables(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.variable.as_str()).collect()
    }

    /// `step,variable,upsilon`, one row per inclusion.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = writer;
        write_provenance(&mut w, self.background_size, self.seed)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "variable", "upsilon"])
            .map_err(to_io)?;
        for s in &self.steps {
            out.write_record([
                s.step.to_string(),
                s.variable.clone(),
                format_f64(s.upsilon),
            ])
            .map_err(to_io)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `subset,ase_s,ase_null,upsilon`, one row per report.
pub fn write_reports_csv<W: Write>(reports: &[ExplainabilityReport], writer: W) -> Result<()> {
    let mut w = writer;
    if let Some(first) = reports.first() {
        write_provenance(&mut w, first.background_size, first.seed)?;
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["subset", "ase_s", "ase_null", "upsilon"])
        .map_err(to_io)?;
    for r in reports {
        out.write_record([
            r.label(),
            format_f64(r.ase_s),
            format_f64(r.ase_null),
            format_f64(r.upsilon),
        ])
        .map_err(to_io)?;
    }
    out.flush()?;
    Ok(())
}

fn write_provenance<W: Write>(w: &mut W, background_size: usize, seed: Option<u64>) -> Result<()> {
    let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    writeln!(w, "# background_size={background_size} seed={seed}")?;
    Ok(())
}

fn to_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Explains one model on one table.
///
/// Predictions on the table and `ASE(PD_∅)` are computed once at
/// construction and shared by every subset evaluated afterwards.
pub struct Explainer<'a> {
    model: &'a dyn Predictor,
    background: BackgroundSet<'a>,
    engine: PdEngine,
    predictions: Vec<f64>,
    ase_null: f64,
}

impl<'a> Explainer<'a> {
    pub fn new(
        model: &'a dyn Predictor,
        background: BackgroundSet<'a>,
        engine: PdEngine,
    ) -> Result<Self> {
        let table = background.table();
        if model.features() != table.schema() {
            return Err(Error::Schema(
                "table columns do not match the model's feature schema".into(),
            ));
        }
        let predictions = checked_predict(model, table.matrix(), None)?;
        let first = predictions[0];
        let ase_null = ase_null(&predictions)?;
        if predictions.iter().all(|&v| v == first) || ase_null <= 0.0 {
            return Err(Error::DegenerateModel);
        }
        Ok(Explainer {
            model,
            background,
            engine,
            predictions,
            ase_null,
        })
    }

    pub fn predictions(&self) -> &[f64] {
        &self.predictions
    }

    pub fn ase_null(&self) -> f64 {
        self.ase_null
    }

    pub fn background(&self) -> &BackgroundSet<'a> {
        &self.background
    }

    pub fn engine(&self) -> &PdEngine {
        &self.engine
    }

    pub fn model(&self) -> &'a dyn Predictor {
        self.model
    }

    /// Υ for one subset. The empty subset is the null PD itself (Υ = 0);
    /// the full subset reproduces the model (Υ = 1).
    pub fn upsilon(&self, subset: &FeatureSubset) -> Result<ExplainabilityReport> {
        let schema = self.background.table().schema();
        let ase_s = if subset.is_empty() {
            self.ase_null
        } else {
            let pd = self
                .engine
                .pd_at_observations(self.model, &self.background, subset)?;
            ase(&self.predictions, &pd.values)?
        };
        Ok(ExplainabilityReport {
            subset: subset.clone(),
            columns: subset.names(schema).into_iter().map(String::from).collect(),
            ase_s,
            ase_null: self.ase_null,
            upsilon: 1.0 - ase_s / self.ase_null,
            background_size: self.background.size(),
            seed: self.background.seed(),
        })
    }

    /// Reports sorted by Υ descending; ties keep the lower first column first.
    pub fn upsilon_table(&self, subsets: &[FeatureSubset]) -> Result<Vec<ExplainabilityReport>> {
        let mut reports = subsets
            .iter()
            .map(|s| self.upsilon(s))
            .collect::<Result<Vec<_>>>()?;
        reports.sort_by(|a, b| {
            b.upsilon
                .total_cmp(&a.upsilon)
                .then_with(|| a.subset.indices().first().cmp(&b.subset.indices().first()))
        });
        Ok(reports)
    }

    /// Every single-column subset, ranked.
    pub fn singleton_table(&self) -> Result<Vec<ExplainabilityReport>> {
        let p = self.background.table().ncols();
        let subsets: Vec<FeatureSubset> = (0..p).map(FeatureSubset::single).collect();
        self.upsilon_table(&subsets)
    }

    /// Greedy forward selection maximising Υ.
    ///
    /// Starts from `s = ∅` (Υ = 0). Each step adds the remaining column with
    /// the largest Υ(s ∪ {v}), lowest index on ties, and stops after
    /// `max_steps` inclusions, when every column is in `s`, or when the best
    /// improvement falls below `min_gain`.
    pub fn forward_select(
        &self,
        max_steps: Option<usize>,
        min_gain: f64,
    ) -> Result<SelectionTrace> {
        if !min_gain.is_finite() || min_gain < 0.0 {
            return Err(Error::Arg(format!(
                "min_gain must be a finite number ≥ 0, got {min_gain}"
            )));
        }
        let table = self.background.table();
        let p = table.ncols();
        if p == 0 {
            return Err(Error::Arg("no candidate columns".into()));
        }
        let limit = max_steps.unwrap_or(p).min(p);
        let mut subset = FeatureSubset::empty();
        let mut current = 0.0;
        let mut steps = Vec::new();
        while steps.len() < limit {
            let mut best: Option<(usize, f64)> = None;
            for v in (0..p).filter(|v| !subset.contains(*v)) {
                let u = self.upsilon(&subset.with(v))?.upsilon;
                if best.is_none_or(|(_, b)| u > b) {
                    best = Some((v, u));
                }
            }
            let Some((column, upsilon)) = best else { break };
            if upsilon - current < min_gain {
                break;
            }
            subset = subset.with(column);
            current = upsilon;
            steps.push(SelectionStep {
                step: steps.len() + 1,
                column,
                variable: table.schema().column(column).name.clone(),
                upsilon,
            });
        }
        Ok(SelectionTrace {
            steps,
            background_size: self.background.size(),
            seed: self.background.seed(),
        })
    }
}

/// One-shot Υ with the default engine.
pub fn upsilon(
    model: &dyn Predictor,
    background: BackgroundSet<'_>,
    subset: &FeatureSubset,
) -> Result<ExplainabilityReport> {
    Explainer::new(model, background, PdEngine::default())?.upsilon(subset)
}
