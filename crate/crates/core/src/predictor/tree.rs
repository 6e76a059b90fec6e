//! CART regression trees grown by variance reduction.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::Accumulator;
use crate::tabular::{ColumnRole, Matrix, Schema};

/// Rows satisfying the rule go to the left child.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// Numeric: `x <= threshold`.
    LessEq(f64),
    /// Categorical one-vs-rest: `x == level`.
    Level(u32),
}

impl SplitRule {
    #[inline]
    pub fn goes_left(&self, value: f64) -> bool {
        match *self {
            SplitRule::LessEq(t) => value <= t,
            SplitRule::Level(l) => value == l as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf(f64),
    Split {
        feature: u32,
        rule: SplitRule,
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features sampled (without replacement) at each split.
    pub m_try: usize,
}

/// Flat binary tree; node 0 is the root and children always follow their
/// parent in the node array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn constant(value: f64) -> Self {
        RegressionTree {
            nodes: vec![Node::Leaf(value)],
        }
    }

    /// Builds a tree from raw nodes, checking structure against `schema`.
    pub fn from_nodes(nodes: Vec<Node>, schema: &Schema) -> Result<Self> {
        let tree = RegressionTree { nodes };
        tree.validate(schema)?;
        Ok(tree)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf(_)))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => {
                    1 + go(nodes, left as usize).max(go(nodes, right as usize))
                }
            }
        }
        go(&self.nodes, 0)
    }

    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(v) => return *v,
                Node::Split {
                    feature,
                    rule,
                    left,
                    right,
                } => {
                    i = if rule.goes_left(row[*feature as usize]) {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub(crate) fn validate(&self, schema: &Schema) -> Result<()> {
        let bad = |msg: String| Err(Error::Schema(msg));
        if self.nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        let mut parents = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Leaf(v) if !v.is_finite() => return bad(format!("node {i}: leaf value {v}")),
                Node::Leaf(_) => {}
                Node::Split {
                    feature,
                    rule,
                    left,
                    right,
                } => {
                    let f = *feature as usize;
                    if f >= schema.len() {
                        return bad(format!("node {i}: feature {f} out of range"));
                    }
                    let spec = schema.column(f);
                    match (rule, spec.role) {
                        (SplitRule::LessEq(t), ColumnRole::Numeric) if t.is_finite() => {}
                        (SplitRule::Level(l), ColumnRole::Categorical)
                            if (*l as usize) < spec.levels.len() => {}
                        _ => {
                            return bad(format!(
                                "node {i}: rule {rule:?} invalid for `{}`",
                                spec.name
                            ))
                        }
                    }
                    for child in [*left as usize, *right as usize] {
                        if child <= i || child >= self.nodes.len() {
                            return bad(format!("node {i}: child index {child} invalid"));
                        }
                        parents[child] += 1;
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&c| c != 1) {
            return bad("tree nodes do not form a single binary tree".into());
        }
        Ok(())
    }

    /// Grows a tree on the rows listed in `sample` (duplicates allowed, as
    /// produced by bootstrap resampling).
    pub fn grow<R: Rng>(
        x: &Matrix,
        y: &[f64],
        schema: &Schema,
        sample_rows: Vec<usize>,
        params: &TreeParams,
        rng: &mut R,
    ) -> RegressionTree {
        let p = x.ncols();
        let m_try = params.m_try.clamp(1, p.max(1));
        let min_leaf = params.min_leaf.max(1);
        let mut nodes: Vec<Node> = vec![Node::Leaf(0.0)];
        // (node slot, rows reaching it, depth)
        let mut stack: Vec<(usize, Vec<usize>, usize)> = vec![(0, sample_rows, 0)];
        let mut pairs: Vec<(f64, f64)> = Vec::new();

        while let Some((slot, rows, depth)) = stack.pop() {
            let mean =
                rows.iter().map(|&i| y[i]).collect::<Accumulator>().total() / rows.len() as f64;
            let pure = rows.iter().all(|&i| y[i] == y[rows[0]]);
            let depth_ok = params.max_depth.is_none_or(|d| depth < d);
            if pure || !depth_ok || rows.len() < 2 * min_leaf || p == 0 {
                nodes[slot] = Node::Leaf(mean);
                continue;
            }

            let total: f64 = rows.iter().map(|&i| y[i]).sum();
            let n = rows.len() as f64;
            let mut features: Vec<usize> = sample(rng, p, m_try).into_vec();
            features.sort_unstable();

            let mut best: Option<(f64, usize, SplitRule)> = None;
            for &f in &features {
                let spec = schema.column(f);
                match spec.role {
                    ColumnRole::Numeric => {
                        pairs.clear();
                        pairs.extend(rows.iter().map(|&i| (x.get(i, f), y[i])));
                        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                        let mut left_sum = 0.0;
                        for k in 0..pairs.len() - 1 {
                            left_sum += pairs[k].1;
                            let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
                            if lo == hi {
                                continue;
                            }
                            let nl = (k + 1) as f64;
                            if k + 1 < min_leaf || pairs.len() - k - 1 < min_leaf {
                                continue;
                            }
                            let right_sum = total - left_sum;
                            let score = left_sum * left_sum / nl + right_sum * right_sum / (n - nl);
                            if best.as_ref().is_none_or(|b| score > b.0) {
                                best = Some((score, f, SplitRule::LessEq(midpoint(lo, hi))));
                            }
                        }
                    }
                    ColumnRole::Categorical => {
                        let levels = spec.levels.len();
                        let mut counts = vec![0usize; levels];
                        let mut sums = vec![0.0; levels];
                        for &i in &rows {
                            let l = x.get(i, f) as usize;
                            counts[l] += 1;
                            sums[l] += y[i];
                        }
                        for l in 0..levels {
                            let (cl, cr) = (counts[l], rows.len() - counts[l]);
                            if cl < min_leaf || cr < min_leaf || cl == 0 || cr == 0 {
                                continue;
                            }
                            let right_sum = total - sums[l];
                            let score =
                                sums[l] * sums[l] / cl as f64 + right_sum * right_sum / cr as f64;
                            if best.as_ref().is_none_or(|b| score > b.0) {
                                best = Some((score, f, SplitRule::Level(l as u32)));
                            }
                        }
                    }
                }
            }

            let Some((_, feature, rule)) = best else {
                nodes[slot] = Node::Leaf(mean);
                continue;
            };
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&i| rule.goes_left(x.get(i, feature)));
            let left = nodes.len();
            nodes.push(Node::Leaf(0.0));
            nodes.push(Node::Leaf(0.0));
            nodes[slot] = Node::Split {
                feature: feature as u32,
                rule,
                left: left as u32,
                right: (left + 1) as u32,
            };
            // Right first so the left subtree is grown (and numbered) first.
            stack.push((left + 1, right_rows, depth + 1));
            stack.push((left, left_rows, depth + 1));
        }
        RegressionTree { nodes }
    }

    /// Exact partial dependence of this tree, accumulated into `acc`.
    ///
    /// For every evaluation point `p`, adds `Σ_j tree(p, x_jc)` over the
    /// background rows `j`. `position[f]` is the point column holding
    /// feature `f`, or `None` when `f` belongs to the complement. Splits on
    /// subset features route points; splits on complement features route
    /// background rows; each leaf reached by both contributes
    /// `value · |rows|` to each of its points.
    pub(crate) fn accumulate_pd(
        &self,
        background: &Matrix,
        position: &[Option<usize>],
        points: &Matrix,
        acc: &mut [f64],
    ) {
        let all_rows: Vec<u32> = (0..background.nrows() as u32).collect();
        let all_points: Vec<u32> = (0..points.nrows() as u32).collect();
        let mut stack: Vec<(usize, Vec<u32>, Vec<u32>)> = vec![(0, all_rows, all_points)];
        while let Some((i, rows, pts)) = stack.pop() {
            match &self.nodes[i] {
                Node::Leaf(v) => {
                    let weight = v * rows.len() as f64;
                    for &p in &pts {
                        acc[p as usize] += weight;
                    }
                }
                Node::Split {
                    feature,
                    rule,
                    left,
                    right,
                } => {
                    let f = *feature as usize;
                    let (l, r) = (*left as usize, *right as usize);
                    match position[f] {
                        Some(col) => {
                            let (pl, pr): (Vec<u32>, Vec<u32>) = pts
                                .iter()
                                .partition(|&&p| rule.goes_left(points.get(p as usize, col)));
                            if !pr.is_empty() {
                                stack.push((r, rows.clone(), pr));
                            }
                            if !pl.is_empty() {
                                stack.push((l, rows, pl));
                            }
                        }
                        None => {
                            let (rl, rr): (Vec<u32>, Vec<u32>) = rows
                                .iter()
                                .partition(|&&j| rule.goes_left(background.get(j as usize, f)));
                            if !rr.is_empty() {
                                stack.push((r, rr, pts.clone()));
                            }
                            if !rl.is_empty() {
                                stack.push((l, rl, pts));
                            }
                        }
                    }
                }
            }
        }
    }
}

/// A threshold in `[lo, hi)` separating two adjacent distinct values.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo / 2.0 + hi / 2.0;
    if mid >= lo && mid < hi {
        mid
    } else {
        lo
    }
}
