//! The batch scoring contract `f̂` and the built-in learners.
//!
//! Anything that maps a matrix of schema-conformant rows to one finite
//! prediction per row can be explained. Built-in models are immutable after
//! fitting and may be called concurrently; [`PipePredictor`] talks to a child
//! process and declares itself serial.

mod forest;
mod linear;
mod persist;
mod pipe;
mod tree;

use crate::error::{Error, Result};
use crate::tabular::{ColumnRole, Matrix, Schema};

pub use forest::{fit_forest, BaggedForest, ForestParams};
pub use linear::{fit_linear, LinearModel};
pub use persist::{load_model, save_model, Model, FORMAT_VERSION};
pub use pipe::PipePredictor;
pub use tree::{Node, RegressionTree, SplitRule, TreeParams};

/// How many `predict` calls a predictor tolerates at the same time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concurrency {
    Parallel,
    Serial,
}

pub trait Predictor: Send + Sync {
    /// Schema of the input rows, in column order.
    fn features(&self) -> &Schema;

    /// One finite prediction per input row. Must be deterministic.
    fn predict(&self, rows: &Matrix) -> Result<Vec<f64>>;

    fn concurrency(&self) -> Concurrency {
        Concurrency::Parallel
    }

    /// Tree ensembles expose their structure so partial dependence can be
    /// computed without materialising every synthetic row.
    fn as_forest(&self) -> Option<&BaggedForest> {
        None
    }
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn features(&self) -> &Schema {
        (**self).features()
    }
    fn predict(&self, rows: &Matrix) -> Result<Vec<f64>> {
        (**self).predict(rows)
    }
    fn concurrency(&self) -> Concurrency {
        (**self).concurrency()
    }
    fn as_forest(&self) -> Option<&BaggedForest> {
        (**self).as_forest()
    }
}

impl<P: Predictor + ?Sized> Predictor for Box<P> {
    fn features(&self) -> &Schema {
        (**self).features()
    }
    fn predict(&self, rows: &Matrix) -> Result<Vec<f64>> {
        (**self).predict(rows)
    }
    fn concurrency(&self) -> Concurrency {
        (**self).concurrency()
    }
    fn as_forest(&self) -> Option<&BaggedForest> {
        (**self).as_forest()
    }
}

/// Checks that `rows` has the schema's width and that every cell is a legal
/// value for its column.
pub fn check_rows(schema: &Schema, rows: &Matrix) -> Result<()> {
    if rows.ncols() != schema.len() {
        return Err(Error::Schema(format!(
            "rows have {} columns, model expects {}",
            rows.ncols(),
            schema.len()
        )));
    }
    for (i, row) in rows.rows().enumerate() {
        for (v, spec) in row.iter().zip(schema.columns()) {
            let ok = match spec.role {
                ColumnRole::Numeric => v.is_finite(),
                ColumnRole::Categorical => {
                    v.fract() == 0.0 && *v >= 0.0 && (*v as usize) < spec.levels.len()
                }
            };
            if !ok {
                return Err(Error::Schema(format!(
                    "row {i}: {v} is not a valid value for column `{}`",
                    spec.name
                )));
            }
        }
    }
    Ok(())
}

/// Wraps a row function as a predictor, e.g. an analytic ground-truth model.
pub struct FnPredictor<F> {
    features: Schema,
    f: F,
}

impl<F> FnPredictor<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(features: Schema, f: F) -> Self {
        FnPredictor { features, f }
    }
}

impl<F> Predictor for FnPredictor<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn features(&self) -> &Schema {
        &self.features
    }

    fn predict(&self, rows: &Matrix) -> Result<Vec<f64>> {
        check_rows(&self.features, rows)?;
        Ok(rows.rows().map(&self.f).collect())
    }
}
