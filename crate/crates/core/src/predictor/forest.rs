//! Bagged CART forests.
//!
//! Defaults follow the usual regression forest settings: 500 trees,
//! `m_try = max(⌊p/3⌋, 1)` features per split and a minimum of five rows per
//! leaf. Tree `k` draws its bootstrap and feature samples from a generator
//! seeded with `derive(seed, k)`, so a forest is reproducible no matter how
//! the trees are scheduled across threads.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{RegressionTree, TreeParams};
use super::{check_rows, Predictor};
use crate::error::{Error, Result};
use crate::seed;
use crate::tabular::{DataTable, Matrix, Schema};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: usize,
    /// Features tried per split; `None` means `max(⌊p/3⌋, 1)`.
    pub m_try: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Grow each tree on a bootstrap resample (`false` uses every row once).
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 500,
            m_try: None,
            max_depth: None,
            min_leaf: 5,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn resolved_m_try(&self, p: usize) -> usize {
        self.m_try.unwrap_or(p / 3).clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggedForest {
    features: Schema,
    trees: Vec<RegressionTree>,
    /// Per-tree generator seeds; empty for hand-assembled forests.
    tree_seeds: Vec<u64>,
    params: Option<ForestParams>,
}

impl BaggedForest {
    pub fn from_trees(features: Schema, trees: Vec<RegressionTree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::Fit("a forest needs at least one tree".into()));
        }
        for tree in &trees {
            tree.validate(&features)?;
        }
        Ok(BaggedForest {
            features,
            trees,
            tree_seeds: Vec::new(),
            params: None,
        })
    }

    pub(crate) fn from_parts(
        features: Schema,
        trees: Vec<RegressionTree>,
        tree_seeds: Vec<u64>,
        params: Option<ForestParams>,
    ) -> Result<Self> {
        let mut forest = BaggedForest::from_trees(features, trees)?;
        forest.tree_seeds = tree_seeds;
        forest.params = params;
        Ok(forest)
    }

    pub fn trees(&self) -> &[RegressionTree] {
        &self.trees
    }

    pub fn tree_seeds(&self) -> &[u64] {
        &self.tree_seeds
    }

    pub fn params(&self) -> Option<&ForestParams> {
        self.params.as_ref()
    }

    /// Exact empirical partial dependence at `points` (one column per
    /// subset feature, in `subset` order) averaged over `background`.
    ///
    /// Equivalent to averaging `predict` over every synthetic row
    /// `(p, x_jc)` but never builds those rows: each tree routes points
    /// through splits on subset features and background rows through
    /// splits on complement features.
    pub fn partial_dependence(
        &self,
        background: &Matrix,
        subset: &[usize],
        points: &Matrix,
    ) -> Vec<f64> {
        let mut position = vec![None; self.features.len()];
        for (col, &f) in subset.iter().enumerate() {
            position[f] = Some(col);
        }
        let m = background.nrows() as f64;
        let mut total = vec![0.0; points.nrows()];
        let mut tree_acc = vec![0.0; points.nrows()];
        for tree in &self.trees {
            tree_acc.iter_mut().for_each(|v| *v = 0.0);
            tree.accumulate_pd(background, &position, points, &mut tree_acc);
            for (t, a) in total.iter_mut().zip(&tree_acc) {
                *t += a / m;
            }
        }
        let b = self.trees.len() as f64;
        total.iter_mut().for_each(|v| *v /= b);
        total
    }
}

impl Predictor for BaggedForest {
    fn features(&self) -> &Schema {
        &self.features
    }

    /// Mean of the tree predictions, summed in tree order.
    fn predict(&self, rows: &Matrix) -> Result<Vec<f64>> {
        check_rows(&self.features, rows)?;
        let mut acc = vec![0.0; rows.nrows()];
        for tree in &self.trees {
            for (a, row) in acc.iter_mut().zip(rows.rows()) {
                *a += tree.predict_row(row);
            }
        }
        let b = self.trees.len() as f64;
        Ok(acc.into_iter().map(|a| a / b).collect())
    }

    fn as_forest(&self) -> Option<&BaggedForest> {
        Some(self)
    }
}

pub fn fit_forest(data: &DataTable, target: &str, params: &ForestParams) -> Result<BaggedForest> {
    let j = data
        .schema()
        .index_of(target)
        .ok_or_else(|| Error::Fit(format!("unknown target column `{target}`")))?;
    if !data.schema().column(j).is_numeric() {
        return Err(Error::Fit(format!("target `{target}` is not numeric")));
    }
    if data.n() < 2 {
        return Err(Error::Fit("a forest needs at least two rows".into()));
    }
    if params.trees == 0 {
        return Err(Error::Fit("tree count must be at least 1".into()));
    }
    if params.min_leaf == 0 {
        return Err(Error::Fit("min_leaf must be at least 1".into()));
    }
    let y = data.column(j);
    let features = data.without(target)?;
    if features.ncols() == 0 {
        return Err(Error::Fit("no feature columns besides the target".into()));
    }
    let schema = features.schema().clone();
    let x = features.matrix();
    let n = data.n();
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        m_try: params.resolved_m_try(schema.len()),
    };

    let root = seed::derive(params.seed, seed::stream::BOOTSTRAP);
    let tree_seeds: Vec<u64> = (0..params.trees as u64)
        .map(|k| seed::derive(root, k))
        .collect();
    let trees: Vec<RegressionTree> = tree_seeds
        .par_iter()
        .map(|&s| {
            let mut rng = seed::rng(s, 0);
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            RegressionTree::grow(x, &y, &schema, rows, &tree_params, &mut rng)
        })
        .collect();

    BaggedForest::from_parts(schema, trees, tree_seeds, Some(params.clone()))
}
