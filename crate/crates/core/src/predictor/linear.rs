use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_rows, Predictor};
use crate::error::{Error, Result};
use crate::tabular::{ColumnRole, DataTable, Matrix, Schema};

/// `intercept + Σ coefficients[j] · x_j` over all-numeric features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    features: Schema,
    intercept: f64,
    coefficients: Vec<f64>,
}

impl LinearModel {
    pub fn new(features: Schema, intercept: f64, coefficients: Vec<f64>) -> Result<Self> {
        if let Some(c) = features
            .columns()
            .iter()
            .find(|c| c.role != ColumnRole::Numeric)
        {
            return Err(Error::Fit(format!(
                "linear model needs numeric features, `{}` is categorical",
                c.name
            )));
        }
        if coefficients.len() != features.len() {
            return Err(Error::Fit(format!(
                "{} coefficients for {} features",
                coefficients.len(),
                features.len()
            )));
        }
        if !intercept.is_finite() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Fit("non-finite coefficient".into()));
        }
        Ok(LinearModel {
            features,
            intercept,
            coefficients,
        })
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        row.iter()
            .zip(&self.coefficients)
            .fold(self.intercept, |acc, (x, c)| acc + c * x)
    }
}

impl Predictor for LinearModel {
    fn features(&self) -> &Schema {
        &self.features
    }

    fn predict(&self, rows: &Matrix) -> Result<Vec<f64>> {
        check_rows(&self.features, rows)?;
        Ok(rows.rows().map(|r| self.predict_row(r)).collect())
    }
}

/// Ordinary least squares of `target` on every other column.
///
/// Columns are scaled to unit norm before a Householder QR so the rank test
/// does not depend on feature units.
pub fn fit_linear(data: &DataTable, target: &str) -> Result<LinearModel> {
    let y = data
        .column_by_name(target)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let target_spec = data
        .schema()
        .column(data.schema().index_of(target).unwrap());
    if !target_spec.is_numeric() {
        return Err(Error::Fit(format!("target `{target}` is not numeric")));
    }
    let features = data.without(target)?;
    let schema = features.schema().clone();
    if let Some(c) = schema.columns().iter().find(|c| !c.is_numeric()) {
        return Err(Error::Fit(format!(
            "linear model needs numeric features, `{}` is categorical",
            c.name
        )));
    }
    let (n, p) = (features.n(), features.ncols());
    if n <= p {
        return Err(Error::Fit(format!(
            "{n} rows cannot determine {p} coefficients and an intercept"
        )));
    }

    let mut design = DMatrix::from_fn(
        n,
        p + 1,
        |i, j| {
            if j == 0 {
                1.0
            } else {
                features.row(i)[j - 1]
            }
        },
    );
    let mut scale = vec![0.0; p + 1];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = design.column(j).norm();
        if norm == 0.0 {
            return Err(Error::Fit(format!(
                "column `{}` is identically zero",
                schema.column(j - 1).name
            )));
        }
        *s = norm;
        design.column_mut(j).unscale_mut(norm);
    }

    let qr = design.qr();
    let r = qr.r();
    for j in 0..=p {
        if r[(j, j)].abs() < 1e-10 {
            return Err(Error::Fit(
                "design matrix is singular (collinear or constant features)".into(),
            ));
        }
    }
    let mut rhs = DVector::from_vec(y);
    qr.q_tr_mul(&mut rhs);
    let beta = r
        .solve_upper_triangular(&rhs.rows(0, p + 1).into_owned())
        .ok_or_else(|| Error::Fit("design matrix is singular".into()))?;

    let intercept = beta[0] / scale[0];
    let coefficients = (1..=p).map(|j| beta[j] / scale[j]).collect();
    LinearModel::new(schema, intercept, coefficients)
}
