//! Versioned JSON model documents.
//!
//! ```json
//! { "format_version": 1, "model_kind": "forest", "schema": [...], "parameters": {...} }
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::forest::{BaggedForest, ForestParams};
use super::linear::LinearModel;
use super::tree::{Node, RegressionTree};
use super::{Concurrency, Predictor};
use crate::error::{Error, Result};
use crate::tabular::{Matrix, Schema};

pub const FORMAT_VERSION: u32 = 1;

/// A built-in model that can be saved and loaded.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Forest(BaggedForest),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Linear(_) => "linear",
            Model::Forest(_) => "forest",
        }
    }
}

impl From<LinearModel> for Model {
    fn from(m: LinearModel) -> Self {
        Model::Linear(m)
    }
}

impl From<BaggedForest> for Model {
    fn from(m: BaggedForest) -> Self {
        Model::Forest(m)
    }
}

impl Predictor for Model {
    fn features(&self) -> &Schema {
        match self {
            Model::Linear(m) => m.features(),
            Model::Forest(m) => m.features(),
        }
    }

    fn predict(&self, rows: &Matrix) -> Result<Vec<f64>> {
        match self {
            Model::Linear(m) => m.predict(rows),
            Model::Forest(m) => m.predict(rows),
        }
    }

    fn concurrency(&self) -> Concurrency {
        Concurrency::Parallel
    }

    fn as_forest(&self) -> Option<&BaggedForest> {
        match self {
            Model::Forest(m) => Some(m),
            Model::Linear(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Document {
    format_version: u32,
    model_kind: String,
    schema: Schema,
    parameters: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct LinearParameters {
    intercept: f64,
    coefficients: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ForestParameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fit: Option<ForestParams>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tree_seeds: Vec<u64>,
    trees: Vec<Vec<Node>>,
}

pub fn to_json(model: &Model) -> String {
    let (schema, parameters) = match model {
        Model::Linear(m) => (
            m.features().clone(),
            serde_json::to_value(LinearParameters {
                intercept: m.intercept(),
                coefficients: m.coefficients().to_vec(),
            }),
        ),
        Model::Forest(f) => (
            f.features().clone(),
            serde_json::to_value(ForestParameters {
                fit: f.params().cloned(),
                tree_seeds: f.tree_seeds().to_vec(),
                trees: f.trees().iter().map(|t| t.nodes().to_vec()).collect(),
            }),
        ),
    };
    let doc = Document {
        format_version: FORMAT_VERSION,
        model_kind: model.kind().to_string(),
        schema,
        parameters: parameters.expect("model parameters serialize"),
    };
    serde_json::to_string(&doc).expect("model document serializes")
}

pub fn from_json(text: &str) -> std::result::Result<Model, String> {
    let doc: Document = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if doc.format_version != FORMAT_VERSION {
        return Err(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            doc.format_version
        ));
    }
    match doc.model_kind.as_str() {
        "linear" => {
            let p: LinearParameters =
                serde_json::from_value(doc.parameters).map_err(|e| e.to_string())?;
            LinearModel::new(doc.schema, p.intercept, p.coefficients)
                .map(Model::Linear)
                .map_err(|e| e.to_string())
        }
        "forest" => {
            let p: ForestParameters =
                serde_json::from_value(doc.parameters).map_err(|e| e.to_string())?;
            let trees = p
                .trees
                .into_iter()
                .map(|nodes| RegressionTree::from_nodes(nodes, &doc.schema))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.to_string())?;
            BaggedForest::from_parts(doc.schema, trees, p.tree_seeds, p.fit)
                .map(Model::Forest)
                .map_err(|e| e.to_string())
        }
        other => Err(format!("unknown model_kind `{other}`")),
    }
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(model)).map_err(|e| Error::Persist {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let persist = |message: String| Error::Persist {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| persist(e.to_string()))?;
    from_json(&text).map_err(persist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::{fit_forest, fit_linear};
    use crate::tabular::DataTable;
    use rand::{Rng, SeedableRng};

    fn data() -> DataTable {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let x1: Vec<f64> = (0..60).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x2: Vec<f64> = (0..60).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y = x1.iter().zip(&x2).map(|(a, b)| a * b + a.sin()).collect();
        DataTable::from_columns(vec![("x1", x1), ("x2", x2), ("y", y)]).unwrap()
    }

    #[test]
    fn linear_round_trip() {
        let m = Model::from(fit_linear(&data(), "y").unwrap());
        let back = from_json(&to_json(&m)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn forest_round_trip_predicts_identically() {
        let params = ForestParams {
            trees: 10,
            seed: 1,
            ..Default::default()
        };
        let m = Model::from(fit_forest(&data(), "y", &params).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("forest.json");
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(m, back);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let rows: Vec<[f64; 2]> = (0..100)
            .map(|_| [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)])
            .collect();
        let rows = Matrix::from_rows(2, &rows).unwrap();
        let a = m.predict(&rows).unwrap();
        let b = back.predict(&rows).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn truncated_document_rejected() {
        let m = Model::from(fit_linear(&data(), "y").unwrap());
        let json = to_json(&m);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        fs::write(&path, &json[..json.len() / 2]).unwrap();
        assert!(matches!(load_model(&path), Err(Error::Persist { .. })));
    }

    #[test]
    fn version_mismatch_rejected() {
        let m = Model::from(fit_linear(&data(), "y").unwrap());
        let json = to_json(&m).replace("\"format_version\":1", "\"format_version\":99");
        let err = from_json(&json).unwrap_err();
        assert!(err.contains("format_version 99"), "{err}");
    }

    #[test]
    fn top_level_fields_present() {
        let m = Model::from(fit_linear(&data(), "y").unwrap());
        let v: serde_json::Value = serde_json::from_str(&to_json(&m)).unwrap();
        for key in ["format_version", "model_kind", "schema", "parameters"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["model_kind"], "linear");
    }
}
