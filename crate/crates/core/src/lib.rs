//! Partial dependence for black-box regression models, and how much of a
//! model's behaviour a partial dependence plot actually shows.
//!
//! The pipeline is: load a [`DataTable`], obtain a [`Predictor`] (fit one of
//! the built-in learners, load a saved model, or bridge to an external
//! process), compute partial dependence with [`PdEngine`], and score it with
//! the explainability measure Υ via [`Explainer`]. The [`emit`] module
//! renders the diagnostic plots as SVG with CSV sidecars.

pub mod emit;
pub mod error;
pub mod explain;
pub mod pdp;
pub mod predictor;
pub mod seed;
pub mod simulate;
pub mod sum;
pub mod tabular;

pub use emit::{
    render_match_plot, render_matrix, render_pd2d, render_pdp_overlay, Pd2dMode, Plot, PlotKind,
    PlotSpec,
};
pub use error::{Error, Result};
pub use explain::{
    ase, ase_null, upsilon, write_reports_csv, ExplainabilityReport, Explainer, SelectionStep,
    SelectionTrace,
};
pub use pdp::{BackgroundSet, PdEngine, PdKind, PdResult};
pub use predictor::{
    fit_forest, fit_linear, load_model, save_model, BaggedForest, Concurrency, FnPredictor,
    ForestParams, LinearModel, Model, PipePredictor, Predictor, RegressionTree,
};
pub use simulate::LinearSimulation;
pub use tabular::{
    load_csv, quantile_grid, read_csv, ColumnRole, ColumnSpec, CsvOptions, DataTable,
    FeatureSubset, Matrix, Schema,
};
