//! Weighted gradient-boosted decision trees for binary classification.
//!
//! Logistic loss, second-order (Newton) leaf values, histogram split search
//! over quantile-binned features, level-wise growth. Instance weights enter
//! through the gradient/hessian statistics and the base rate, which makes
//! reweighing-based mitigation exact: duplicating a row and doubling its
//! weight train the same model.

mod binning;
mod tree;

pub use binning::{bin_dataset, bin_index, BinnedDataset, BinnedFeature};
pub use tree::{DecisionTree, Node};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Boosting hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbdtParams {
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    /// Minimum hessian sum per child.
    #[serde(default = "default_min_leaf_weight")]
    pub min_leaf_weight: f64,
    /// L2 regularization on leaf values.
    #[serde(default = "default_l2_leaf_reg")]
    pub l2_leaf_reg: f64,
    #[serde(default = "default_max_bins")]
    pub max_bins: usize,
    /// Reserved; training is deterministic and draws nothing from it.
    #[serde(default)]
    pub seed: u64,
}

fn default_rounds() -> usize {
    200
}
fn default_learning_rate() -> f64 {
    0.1
}
fn default_max_depth() -> usize {
    6
}
fn default_min_leaf_weight() -> f64 {
    1.0
}
fn default_l2_leaf_reg() -> f64 {
    1.0
}
fn default_max_bins() -> usize {
    255
}

impl Default for GbdtParams {
    fn default() -> Self {
        Self {
            rounds: default_rounds(),
            learning_rate: default_learning_rate(),
            max_depth: default_max_depth(),
            min_leaf_weight: default_min_leaf_weight(),
            l2_leaf_reg: default_l2_leaf_reg(),
            max_bins: default_max_bins(),
            seed: 0,
        }
    }
}

impl GbdtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter("learning rate must be > 0".into()));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidParameter("max depth must be >= 1".into()));
        }
        Ok(())
    }
}

/// Trained ensemble: prediction = sigmoid(base_score + lr * sum of trees).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub n_features: usize,
    pub trees: Vec<DecisionTree>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Best split of a node, expressed as a bin boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub cut_index: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Greedy histogram scan over every (feature, bin boundary) pair.
///
/// Returns the maximal-gain split whose children both carry at least
/// `min_leaf_weight` hessian mass and one row, or `None` when no split has
/// positive gain. Ties resolve to the lower feature index, then the lower
/// threshold.
pub fn find_best_split(
    binned: &BinnedDataset,
    rows: &[usize],
    g: &[f64],
    h: &[f64],
    params: &GbdtParams,
) -> Option<SplitCandidate> {
    if rows.len() < 2 {
        return None;
    }
    let lambda = params.l2_leaf_reg;
    let mut g_total = 0.0;
    let mut h_total = 0.0;
    for &r in rows {
        g_total += g[r];
        h_total += h[r];
    }
    let parent_score = g_total * g_total / (h_total + lambda);
    let mut best: Option<SplitCandidate> = None;
    for (f, feat) in binned.features.iter().enumerate() {
        if feat.cuts.is_empty() {
            continue;
        }
        let n_bins = feat.cuts.len() + 1;
        let mut hist_g = vec![0.0f64; n_bins];
        let mut hist_h = vec![0.0f64; n_bins];
        let mut hist_n = vec![0usize; n_bins];
        for &r in rows {
            let b = feat.bins[r] as usize;
            hist_g[b] += g[r];
            hist_h[b] += h[r];
            hist_n[b] += 1;
        }
        let mut g_left = 0.0;
        let mut h_left = 0.0;
        let mut n_left = 0usize;
        for j in 0..feat.cuts.len() {
            g_left += hist_g[j];
            h_left += hist_h[j];
            n_left += hist_n[j];
            let g_right = g_total - g_left;
            let h_right = h_total - h_left;
            let n_right = rows.len() - n_left;
            if n_left == 0 || n_right == 0 {
                continue;
            }
            if h_left < params.min_leaf_weight || h_right < params.min_leaf_weight {
                continue;
            }
            let gain = 0.5
                * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda)
                    - parent_score);
            if gain > 0.0 && best.map_or(true, |b| gain > b.gain) {
                best = Some(SplitCandidate {
                    feature: f,
                    cut_index: j,
                    threshold: feat.cuts[j],
                    gain,
                });
            }
        }
    }
    best
}

fn leaf_value(rows: &[usize], g: &[f64], h: &[f64], lambda: f64) -> f64 {
    let mut gs = 0.0;
    let mut hs = 0.0;
    for &r in rows {
        gs += g[r];
        hs += h[r];
    }
    -gs / (hs + lambda)
}

/// Grow one level-wise tree; returns the tree and each training row's leaf
/// value so the caller can update scores without re-traversal.
fn grow_tree(
    binned: &BinnedDataset,
    g: &[f64],
    h: &[f64],
    params: &GbdtParams,
    row_output: &mut [f64],
) -> DecisionTree {
    let lambda = params.l2_leaf_reg;
    let mut nodes: Vec<Node> = vec![Node::Leaf { value: 0.0 }];
    let all_rows: Vec<usize> = (0..binned.n_rows).collect();
    let mut frontier: Vec<(usize, Vec<usize>)> = vec![(0, all_rows)];
    for depth in 0..params.max_depth {
        let mut next = Vec::new();
        for (id, rows) in frontier {
            let split = if depth < params.max_depth {
                find_best_split(binned, &rows, g, h, params)
            } else {
                None
            };
            match split {
                Some(s) => {
                    let feat = &binned.features[s.feature];
                    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                        .into_iter()
                        .partition(|&r| (feat.bins[r] as usize) <= s.cut_index);
                    let left = nodes.len();
                    let right = nodes.len() + 1;
                    nodes.push(Node::Leaf { value: 0.0 });
                    nodes.push(Node::Leaf { value: 0.0 });
                    nodes[id] = Node::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left,
                        right,
                    };
                    next.push((left, left_rows));
                    next.push((right, right_rows));
                }
                None => {
                    let v = leaf_value(&rows, g, h, lambda);
                    nodes[id] = Node::Leaf { value: v };
                    for &r in &rows {
                        row_output[r] = v;
                    }
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    // anything still open at max depth becomes a leaf
    for (id, rows) in frontier {
        let v = leaf_value(&rows, g, h, lambda);
        nodes[id] = Node::Leaf { value: v };
        for &r in &rows {
            row_output[r] = v;
        }
    }
    DecisionTree { nodes }
}

/// Train a weighted GBDT on the dataset's features, labels and weights.
pub fn train(ds: &Dataset, params: &GbdtParams) -> Result<GbdtModel> {
    params.validate()?;
    let n = ds.n_rows();
    if n < 2 {
        return Err(Error::InvalidDataset("need at least 2 rows".into()));
    }
    let weights = ds.weights();
    let labels = ds.labels();
    let w_total: f64 = weights.iter().sum();
    let w_pos: f64 = labels
        .iter()
        .zip(weights)
        .filter(|(&l, _)| l == 1)
        .map(|(_, &w)| w)
        .sum();
    if w_pos == 0.0 || w_pos == w_total {
        return Err(Error::SingleClass);
    }
    let base_rate = w_pos / w_total;
    let base_score = (base_rate / (1.0 - base_rate)).ln();

    let binned = bin_dataset(ds.features(), ds.n_features(), params.max_bins)?;

    let mut score = vec![base_score; n];
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n];
    let mut row_output = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.rounds);
    for _ in 0..params.rounds {
        for i in 0..n {
            let p = sigmoid(score[i]);
            g[i] = weights[i] * (p - labels[i] as f64);
            h[i] = (weights[i] * p * (1.0 - p)).max(1e-16);
        }
        let tree = grow_tree(&binned, &g, &h, params, &mut row_output);
        for i in 0..n {
            score[i] += params.learning_rate * row_output[i];
        }
        trees.push(tree);
    }
    Ok(GbdtModel {
        base_score,
        learning_rate: params.learning_rate,
        n_features: ds.n_features(),
        trees,
    })
}

/// Predicted positive-class probabilities, one per row.
pub fn predict_proba(model: &GbdtModel, features: &[f64], n_cols: usize) -> Result<Vec<f64>> {
    if n_cols != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            got: n_cols,
        });
    }
    let n_rows = if n_cols == 0 { 0 } else { features.len() / n_cols };
    let mut out = Vec::with_capacity(n_rows);
    for r in 0..n_rows {
        let row = &features[r * n_cols..(r + 1) * n_cols];
        let mut s = model.base_score;
        for tree in &model.trees {
            s += model.learning_rate * tree.predict_row(row);
        }
        out.push(sigmoid(s));
    }
    Ok(out)
}

/// Hard labels: 1 iff probability >= threshold.
pub fn predict_label(
    model: &GbdtModel,
    features: &[f64],
    n_cols: usize,
    threshold: f64,
) -> Result<Vec<u8>> {
    Ok(predict_proba(model, features, n_cols)?
        .into_iter()
        .map(|p| (p >= threshold) as u8)
        .collect())
}

/// Weighted logistic loss of a score-free probability vector; used by the
/// training-loss invariants.
pub fn weighted_log_loss(probs: &[f64], labels: &[u8], weights: &[f64]) -> f64 {
    let eps = 1e-15;
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&p, &y), &w) in probs.iter().zip(labels).zip(weights) {
        let p = p.clamp(eps, 1.0 - eps);
        num -= w * if y == 1 { p.ln() } else { (1.0 - p).ln() };
        den += w;
    }
    num / den
}
