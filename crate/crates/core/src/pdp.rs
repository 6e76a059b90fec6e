//! Empirical partial dependence.
//!
//! `PD_s(x_s) = (1/m) Σ_j f̂(x_s, x_jc)` over the `m` background rows. The
//! engine evaluates it at arbitrary points, at every observed row (the
//! input to ASE and Υ), on plotting grids, and for `s = ∅` as the mean
//! prediction.
//!
//! Work is split over evaluation points. Each point's value is reduced in
//! background-row order with compensated summation, so results are
//! bit-identical for any thread count or batch size.

use std::collections::HashMap;
use std::io::Write;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor::{Concurrency, Predictor};
use crate::seed;
use crate::sum::Accumulator;
use crate::tabular::{
    format_f64, quantile_grid, ColumnRole, ColumnSpec, DataTable, FeatureSubset, Matrix,
};

/// The rows whose complement values are averaged over.
#[derive(Debug, Clone)]
pub struct BackgroundSet<'a> {
    table: &'a DataTable,
    indices: Option<Vec<usize>>,
    rows: Matrix,
    seed: Option<u64>,
}

impl<'a> BackgroundSet<'a> {
    pub fn full(table: &'a DataTable) -> Self {
        BackgroundSet {
            table,
            indices: None,
            rows: table.matrix().clone(),
            seed: None,
        }
    }

    /// `m` rows drawn without replacement (kept in table order). Returns the
    /// full table when `m ≥ n`.
    pub fn subsample(table: &'a DataTable, m: usize, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Engine(
                "background must contain at least one row".into(),
            ));
        }
        if m >= table.n() {
            return Ok(BackgroundSet::full(table));
        }
        let mut rng = seed::rng(seed, seed::stream::BACKGROUND);
        let mut indices = sample(&mut rng, table.n(), m).into_vec();
        indices.sort_unstable();
        let rows = table.matrix().select_rows(&indices);
        Ok(BackgroundSet {
            table,
            indices: Some(indices),
            rows,
            seed: Some(seed),
        })
    }

    /// Full table, or a seeded subsample when `cap` is below `n`.
    pub fn capped(table: &'a DataTable, cap: Option<usize>, seed: u64) -> Result<Self> {
        match cap {
            Some(m) => BackgroundSet::subsample(table, m, seed),
            None => Ok(BackgroundSet::full(table)),
        }
    }

    pub fn table(&self) -> &'a DataTable {
        self.table
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn size(&self) -> usize {
        self.rows.nrows()
    }

    /// Row indices into the parent table; `None` when the whole table is used.
    pub fn indices(&self) -> Option<&[usize]> {
        self.indices.as_deref()
    }

    /// Seed of the subsample; `None` when the whole table is used.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdKind {
    AtPoints,
    AtObservations,
    Null,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdResult {
    pub subset: FeatureSubset,
    /// Specs of the subset columns, in subset order.
    pub columns: Vec<ColumnSpec>,
    pub kind: PdKind,
    /// Evaluation coordinates over the subset columns; empty for `Null`.
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub background_size: usize,
    pub seed: Option<u64>,
}

impl PdResult {
    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    /// One row per point: the subset coordinates followed by `pd_value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.column_names();
        header.push("pd_value");
        out.write_record(&header).map_err(to_io)?;
        if self.kind == PdKind::Null {
            out.write_record([format_f64(self.values[0])])
                .map_err(to_io)?;
        } else {
            for (point, value) in self.points.iter().zip(&self.values) {
                let mut record: Vec<String> = point
                    .iter()
                    .zip(&self.columns)
                    .map(|(&v, spec)| spec.format_value(v))
                    .collect();
                record.push(format_f64(*value));
                out.write_record(&record).map_err(to_io)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pd result serializes")
    }
}

fn to_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

#[derive(Debug, Clone)]
pub struct PdEngine {
    /// Upper bound on synthetic rows per `predict` call.
    pub batch_rows: usize,
    /// Use exact tree traversal for forests instead of synthetic rows.
    pub use_model_structure: bool,
}

impl Default for PdEngine {
    fn default() -> Self {
        PdEngine {
            batch_rows: 1 << 16,
            use_model_structure: true,
        }
    }
}

impl PdEngine {
    pub fn generic() -> Self {
        PdEngine {
            use_model_structure: false,
            ..PdEngine::default()
        }
    }

    pub fn with_batch_rows(mut self, batch_rows: usize) -> Self {
        self.batch_rows = batch_rows.max(1);
        self
    }

    pub fn pd_at_points(
        &self,
        model: &dyn Predictor,
        background: &BackgroundSet<'_>,
        subset: &FeatureSubset,
        points: &Matrix,
    ) -> Result<PdResult> {
        let table = background.table();
        check_model(model, table)?;
        if subset.is_empty() {
            return Err(Error::Engine(
                "pd_at_points needs a nonempty subset; use pd_null for s = ∅".into(),
            ));
        }
        check_points(table, subset, points)?;
        let values = self.evaluate(model, background, subset, points)?;
        Ok(PdResult {
            subset: subset.clone(),
            columns: subset_specs(table, subset),
            kind: PdKind::AtPoints,
            points: points.rows().map(<[f64]>::to_vec).collect(),
            values,
            background_size: background.size(),
            seed: background.seed(),
        })
    }

    /// `PD_s(x_is)` for every row of the background's parent table.
    ///
    /// Repeated subset values are evaluated once. For the full subset the
    /// complement is empty and the result is the model's predictions.
    pub fn pd_at_observations(
        &self,
        model: &dyn Predictor,
        background: &BackgroundSet<'_>,
        subset: &FeatureSubset,
    ) -> Result<PdResult> {
        let table = background.table();
        check_model(model, table)?;
        let observed: Vec<Vec<f64>> = table
            .matrix()
            .rows()
            .map(|row| subset.indices().iter().map(|&j| row[j]).collect())
            .collect();

        let values = if subset.is_empty() {
            let null = self.null_value(model, background)?;
            vec![null; table.n()]
        } else if subset.is_full(table.ncols()) {
            checked_predict(model, table.matrix(), None)?
        } else {
            let mut slot: HashMap<Vec<u64>, usize> = HashMap::new();
            let mut unique = Matrix::with_capacity(subset.len(), table.n());
            let mut owner = Vec::with_capacity(table.n());
            for point in &observed {
                let key = point.iter().map(|v| v.to_bits()).collect();
                let next = slot.len();
                let k = *slot.entry(key).or_insert_with(|| {
                    unique.push_row(point);
                    next
                });
                owner.push(k);
            }
            let unique_values = self.evaluate(model, background, subset, &unique)?;
            owner.into_iter().map(|k| unique_values[k]).collect()
        };

        Ok(PdResult {
            subset: subset.clone(),
            columns: subset_specs(table, subset),
            kind: PdKind::AtObservations,
            points: observed,
            values,
            background_size: background.size(),
            seed: background.seed(),
        })
    }

    /// The constant `PD_∅`: mean prediction over the background rows.
    pub fn pd_null(
        &self,
        model: &dyn Predictor,
        background: &BackgroundSet<'_>,
    ) -> Result<PdResult> {
        check_model(model, background.table())?;
        let value = self.null_value(model, background)?;
        Ok(PdResult {
            subset: FeatureSubset::empty(),
            columns: Vec::new(),
            kind: PdKind::Null,
            points: Vec::new(),
            values: vec![value],
            background_size: background.size(),
            seed: background.seed(),
        })
    }

    /// PD on a plotting grid for one or two columns.
    ///
    /// Numeric columns use [`quantile_grid`] with the matching entry of
    /// `grid_sizes` (a single entry applies to every column); categorical
    /// columns use their levels. Two-column grids are the Cartesian product
    /// in row-major order.
    pub fn pd_grid(
        &self,
        model: &dyn Predictor,
        background: &BackgroundSet<'_>,
        subset: &FeatureSubset,
        grid_sizes: &[usize],
    ) -> Result<PdResult> {
        if !(1..=2).contains(&subset.len()) {
            return Err(Error::Engine(format!(
                "plotting grids support 1 or 2 columns, got {}",
                subset.len()
            )));
        }
        let table = background.table();
        let axes = subset
            .indices()
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                let g = grid_sizes
                    .get(k)
                    .or(grid_sizes.first())
                    .copied()
                    .unwrap_or(50);
                let spec = table.schema().column(j);
                match spec.role {
                    ColumnRole::Numeric => quantile_grid(table, j, g),
                    ColumnRole::Categorical => {
                        Ok((0..spec.levels.len()).map(|l| l as f64).collect())
                    }
                }
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;

        let mut points = Matrix::with_capacity(subset.len(), axes.iter().map(Vec::len).product());
        match axes.as_slice() {
            [a] => a.iter().for_each(|&v| points.push_row(&[v])),
            [a, b] => {
                for &u in a {
                    for &v in b {
                        points.push_row(&[u, v]);
                    }
                }
            }
            _ => unreachable!(),
        }
        self.pd_at_points(model, background, subset, &points)
    }

    fn null_value(&self, model: &dyn Predictor, background: &BackgroundSet<'_>) -> Result<f64> {
        let predictions = checked_predict(model, background.rows(), None)?;
        Ok(predictions.iter().copied().collect::<Accumulator>().total() / predictions.len() as f64)
    }

    fn evaluate(
        &self,
        model: &dyn Predictor,
        background: &BackgroundSet<'_>,
        subset: &FeatureSubset,
        points: &Matrix,
    ) -> Result<Vec<f64>> {
        let m = background.size();
        if m == 0 {
            return Err(Error::Engine("empty background".into()));
        }
        let npoints = points.nrows();
        if npoints == 0 {
            return Ok(Vec::new());
        }

        if let (true, Some(forest)) = (self.use_model_structure, model.as_forest()) {
            let chunk = 64;
            let chunks: Vec<Vec<f64>> = (0..npoints)
                .into_par_iter()
                .step_by(chunk)
                .map(|start| {
                    let end = (start + chunk).min(npoints);
                    let slice = Matrix::new(
                        end - start,
                        points.ncols(),
                        points.as_slice()[start * points.ncols()..end * points.ncols()].to_vec(),
                    )
                    .expect("chunk shape");
                    forest.partial_dependence(background.rows(), subset.indices(), &slice)
                })
                .collect();
            return Ok(chunks.concat());
        }

        let per_batch = (self.batch_rows / m).max(1);
        let starts: Vec<usize> = (0..npoints).step_by(per_batch).collect();
        let run = |&start: &usize| -> Result<Vec<f64>> {
            let end = (start + per_batch).min(npoints);
            self.evaluate_points(model, background, subset, points, start..end)
        };
        let chunks: Vec<Vec<f64>> = match model.concurrency() {
            Concurrency::Parallel => starts.par_iter().map(run).collect::<Result<_>>()?,
            Concurrency::Serial => starts.iter().map(run).collect::<Result<_>>()?,
        };
        Ok(chunks.concat())
    }

    /// Generic route: materialise `(p, x_jc)` rows and score them.
    fn evaluate_points(
        &self,
        model: &dyn Predictor,
        background: &BackgroundSet<'_>,
        subset: &FeatureSubset,
        points: &Matrix,
        range: std::ops::Range<usize>,
    ) -> Result<Vec<f64>> {
        let bg = background.rows();
        let m = bg.nrows();
        let total = range.len() * m;
        let mut predictions = Vec::with_capacity(total);
        let mut batch_start = 0;
        while batch_start < total {
            let batch_end = (batch_start + self.batch_rows).min(total);
            let mut synthetic = Matrix::with_capacity(bg.ncols(), batch_end - batch_start);
            let mut row = vec![0.0; bg.ncols()];
            for r in batch_start..batch_end {
                let (p, j) = (range.start + r / m, r % m);
                row.copy_from_slice(bg.row(j));
                for (&col, &v) in subset.indices().iter().zip(points.row(p)) {
                    row[col] = v;
                }
                synthetic.push_row(&row);
            }
            let context = format!(
                "synthetic batch of {} rows for evaluation points {}..{}",
                batch_end - batch_start,
                range.start + batch_start / m,
                range.start + (batch_end - 1) / m + 1
            );
            predictions.extend(checked_predict(model, &synthetic, Some(&context))?);
            batch_start = batch_end;
        }
        Ok(predictions
            .chunks_exact(m)
            .map(|chunk| chunk.iter().copied().collect::<Accumulator>().total() / m as f64)
            .collect())
    }
}

fn check_model(model: &dyn Predictor, table: &DataTable) -> Result<()> {
    if model.features() != table.schema() {
        return Err(Error::Schema(
            "table columns do not match the model's feature schema; conform the table first".into(),
        ));
    }
    Ok(())
}

fn check_points(table: &DataTable, subset: &FeatureSubset, points: &Matrix) -> Result<()> {
    if points.ncols() != subset.len() {
        return Err(Error::Arg(format!(
            "points have {} coordinates, subset has {} columns",
            points.ncols(),
            subset.len()
        )));
    }
    for (i, point) in points.rows().enumerate() {
        for (&v, &j) in point.iter().zip(subset.indices()) {
            let spec = table.schema().column(j);
            let ok = match spec.role {
                ColumnRole::Numeric => v.is_finite(),
                ColumnRole::Categorical => {
                    v.fract() == 0.0 && v >= 0.0 && (v as usize) < spec.levels.len()
                }
            };
            if !ok {
                return Err(Error::Type(format!(
                    "point {i}: {v} is not a valid value for `{}`",
                    spec.name
                )));
            }
        }
    }
    Ok(())
}

fn subset_specs(table: &DataTable, subset: &FeatureSubset) -> Vec<ColumnSpec> {
    subset
        .indices()
        .iter()
        .map(|&j| table.schema().column(j).clone())
        .collect()
}

/// Calls the model and enforces the length and finiteness contract.
pub(crate) fn checked_predict(
    model: &dyn Predictor,
    rows: &Matrix,
    context: Option<&str>,
) -> Result<Vec<f64>> {
    let with_context = |msg: String| match context {
        Some(c) => format!("{msg} ({c})"),
        None => msg,
    };
    let out = model.predict(rows).map_err(|e| match e {
        Error::Predict(msg) => Error::Predict(with_context(msg)),
        other => other,
    })?;
    if out.len() != rows.nrows() {
        return Err(Error::Predict(with_context(format!(
            "predictor returned {} values for {} rows",
            out.len(),
            rows.nrows()
        ))));
    }
    if let Some(i) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::Predict(with_context(format!(
            "predictor returned non-finite value {} for row {i}",
            out[i]
        ))));
    }
    Ok(out)
}
