//! Synthetic Minority Over-sampling (SMOTE).
//!
//! Neighbour search runs in z-scored feature space so no single wide-range
//! column dominates the Euclidean distance; interpolation runs in the
//! original feature space. Synthetic rows copy label and protected value
//! from their seed row and carry weight 1.0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{class_counts, Dataset};
use crate::error::{Error, Result};

/// SMOTE hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoteParams {
    /// Neighbour count among minority rows.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Minority:majority count ratio to reach, in (0, 1].
    #[serde(default = "default_target_ratio")]
    pub target_ratio: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_k() -> usize {
    5
}
fn default_target_ratio() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    42
}

impl Default for SmoteParams {
    fn default() -> Self {
        Self {
            k: default_k(),
            target_ratio: default_target_ratio(),
            seed: default_seed(),
        }
    }
}

/// Per-feature mean and standard deviation used for distance-space scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
    /// Columns with zero variance; they map to 0 and are excluded from
    /// distances.
    pub constant: Vec<bool>,
}

impl StandardizationParams {
    /// Undo the transform (constant columns return to their mean).
    pub fn inverse(&self, standardized_row: &[f64]) -> Vec<f64> {
        standardized_row
            .iter()
            .enumerate()
            .map(|(j, &z)| {
                if self.constant[j] {
                    self.mean[j]
                } else {
                    z * self.stddev[j] + self.mean[j]
                }
            })
            .collect()
    }
}

/// Z-score every column of a row-major matrix. Constant columns map to 0 and
/// are flagged.
pub fn standardize_fit_apply(
    features: &[f64],
    n_cols: usize,
) -> Result<(Vec<f64>, StandardizationParams)> {
    if n_cols == 0 {
        return Err(Error::InvalidParameter("no feature columns".into()));
    }
    let n_rows = features.len() / n_cols;
    if n_rows < 2 {
        return Err(Error::InvalidParameter(
            "standardization needs at least 2 rows".into(),
        ));
    }
    let mut mean = vec![0.0; n_cols];
    for r in 0..n_rows {
        for c in 0..n_cols {
            mean[c] += features[r * n_cols + c];
        }
    }
    for m in &mut mean {
        *m /= n_rows as f64;
    }
    let mut var = vec![0.0; n_cols];
    for r in 0..n_rows {
        for c in 0..n_cols {
            let d = features[r * n_cols + c] - mean[c];
            var[c] += d * d;
        }
    }
    let mut stddev = vec![0.0; n_cols];
    let mut constant = vec![false; n_cols];
    for c in 0..n_cols {
        let v = var[c] / n_rows as f64;
        if v <= 0.0 {
            constant[c] = true;
            stddev[c] = 1.0;
        } else {
            stddev[c] = v.sqrt();
        }
    }
    let mut out = Vec::with_capacity(features.len());
    for r in 0..n_rows {
        for c in 0..n_cols {
            if constant[c] {
                out.push(0.0);
            } else {
                out.push((features[r * n_cols + c] - mean[c]) / stddev[c]);
            }
        }
    }
    Ok((
        out,
        StandardizationParams {
            mean,
            stddev,
            constant,
        },
    ))
}

/// Indices of the k nearest rows to `query_index` by Euclidean distance,
/// excluding the query itself; ties broken by lower index.
pub fn k_nearest_minority_neighbors(
    points: &[f64],
    n_cols: usize,
    query_index: usize,
    k: usize,
) -> Result<Vec<usize>> {
    let n_rows = points.len() / n_cols;
    if k + 1 > n_rows {
        return Err(Error::InvalidParameter(format!(
            "k = {k} but only {n_rows} rows"
        )));
    }
    let query = &points[query_index * n_cols..(query_index + 1) * n_cols];
    let mut dists: Vec<(f64, usize)> = (0..n_rows)
        .filter(|&i| i != query_index)
        .map(|i| {
            let row = &points[i * n_cols..(i + 1) * n_cols];
            let d2: f64 = row
                .iter()
                .zip(query)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d2, i)
        })
        .collect();
    dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Ok(dists.into_iter().take(k).map(|(_, i)| i).collect())
}

/// Linear interpolation `x + u * (neighbor - x)` in original feature space.
pub fn synthesize_sample(x: &[f64], neighbor: &[f64], u: f64) -> Result<Vec<f64>> {
    if x.len() != neighbor.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: neighbor.len(),
        });
    }
    Ok(x.iter()
        .zip(neighbor)
        .map(|(&a, &b)| a + u * (b - a))
        .collect())
}

/// Where a synthetic row came from: dataset row indices of its seed and
/// neighbour, and the interpolation coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProvenance {
    pub seed_row: usize,
    pub neighbor_row: usize,
    pub u: f64,
}

/// `fit_resample` plus the provenance of every synthetic row.
pub fn fit_resample_with_provenance(
    ds: &Dataset,
    params: &SmoteParams,
) -> Result<(Dataset, Vec<SyntheticProvenance>)> {
    if params.k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if !(params.target_ratio > 0.0 && params.target_ratio <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target ratio {} outside (0, 1]",
            params.target_ratio
        )));
    }
    let counts = class_counts(ds);
    if counts[&0] == 0 || counts[&1] == 0 {
        return Err(Error::SingleClass);
    }
    let minority_label: u8 = if counts[&1] < counts[&0] { 1 } else { 0 };
    let minority = counts[&minority_label];
    let majority = ds.n_rows() - minority;
    let target = ((params.target_ratio * majority as f64).floor() as usize).max(1);
    if minority >= target {
        return Ok((ds.clone(), Vec::new()));
    }
    if minority <= params.k {
        return Err(Error::DegenerateClass {
            label: minority_label,
            count: minority,
            need: params.k + 1,
        });
    }

    let minority_idx: Vec<usize> = (0..ds.n_rows())
        .filter(|&i| ds.labels()[i] == minority_label)
        .collect();
    let n_cols = ds.n_features();
    let mut minority_features = Vec::with_capacity(minority_idx.len() * n_cols);
    for &i in &minority_idx {
        minority_features.extend_from_slice(ds.row(i));
    }
    let (scaled, _params) = standardize_fit_apply(&minority_features, n_cols)?;
    let neighbors: Vec<Vec<usize>> = (0..minority_idx.len())
        .map(|q| k_nearest_minority_neighbors(&scaled, n_cols, q, params.k))
        .collect::<Result<_>>()?;

    let n_new = target - minority;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut features = Vec::with_capacity(n_new * n_cols);
    let mut labels = Vec::with_capacity(n_new);
    let mut protected = Vec::with_capacity(n_new);
    let mut weights = Vec::with_capacity(n_new);
    let mut provenance = Vec::with_capacity(n_new);
    for _ in 0..n_new {
        let seed_pos = rng.random_range(0..minority_idx.len());
        let neighbor_pos = neighbors[seed_pos][rng.random_range(0..params.k)];
        let u: f64 = rng.random_range(0.0..1.0);
        let seed_row = minority_idx[seed_pos];
        let neighbor_row = minority_idx[neighbor_pos];
        let synthetic = synthesize_sample(ds.row(seed_row), ds.row(neighbor_row), u)?;
        features.extend_from_slice(&synthetic);
        labels.push(minority_label);
        protected.push(ds.protected()[seed_row].clone());
        weights.push(1.0);
        provenance.push(SyntheticProvenance {
            seed_row,
            neighbor_row,
            u,
        });
    }
    let out = ds.append_rows(features, labels, protected, weights)?;
    Ok((out, provenance))
}

/// Balance the class distribution by appending interpolated minority rows
/// until minority count = floor(target_ratio * majority count).
pub fn fit_resample(ds: &Dataset, params: &SmoteParams) -> Result<Dataset> {
    fit_resample_with_provenance(ds, params).map(|(ds, _)| ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(labels: &[u8], features: Vec<f64>, n_cols: usize) -> Dataset {
        let names: Vec<String> = (0..n_cols).map(|i| format!("x{i}")).collect();
        let protected: Vec<String> = labels.iter().map(|_| "a".to_string()).collect();
        assert_eq!(features.len(), labels.len() * n_cols);
        Dataset::unweighted(features, names, labels.to_vec(), protected).unwrap()
    }

    #[test]
    fn two_point_zscore() {
        let (out, p) = standardize_fit_apply(&[0.0, 2.0], 1).unwrap();
        assert_eq!(out, vec![-1.0, 1.0]);
        assert_eq!(p.mean, vec![1.0]);
        assert!(!p.constant[0]);
    }

    #[test]
    fn constant_column_maps_to_zero_and_is_flagged() {
        let (out, p) = standardize_fit_apply(&[5.0, 5.0, 5.0], 1).unwrap();
        assert_eq!(out, vec![0.0, 0.0, 0.0]);
        assert!(p.constant[0]);
        assert_eq!(p.inverse(&[0.0]), vec![5.0]);
    }

    #[test]
    fn standardize_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let features: Vec<f64> = (0..60).map(|_| rng.random_range(-5.0..5.0)).collect();
        let (scaled, p) = standardize_fit_apply(&features, 3).unwrap();
        for r in 0..20 {
            let back = p.inverse(&scaled[r * 3..(r + 1) * 3]);
            for c in 0..3 {
                assert!((back[c] - features[r * 3 + c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nearest_neighbor_1d() {
        let nn = k_nearest_minority_neighbors(&[0.0, 1.0, 10.0], 1, 0, 1).unwrap();
        assert_eq!(nn, vec![1]);
    }

    #[test]
    fn duplicate_of_query_is_chosen_first() {
        let nn = k_nearest_minority_neighbors(&[3.0, 9.0, 3.0, 4.0], 1, 0, 2).unwrap();
        assert_eq!(nn, vec![2, 3]);
    }

    #[test]
    fn knn_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n_rows = 30;
        let n_cols = 4;
        let pts: Vec<f64> = (0..n_rows * n_cols)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        for q in 0..n_rows {
            let got = k_nearest_minority_neighbors(&pts, n_cols, q, 5).unwrap();
            let mut all: Vec<(f64, usize)> = (0..n_rows)
                .filter(|&i| i != q)
                .map(|i| {
                    let d2: f64 = (0..n_cols)
                        .map(|c| {
                            let d = pts[i * n_cols + c] - pts[q * n_cols + c];
                            d * d
                        })
                        .sum();
                    (d2, i)
                })
                .collect();
            all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let expect: Vec<usize> = all.into_iter().take(5).map(|(_, i)| i).collect();
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn synthesize_midpoint_and_endpoints() {
        let x = [0.0, 0.0];
        let n = [1.0, 1.0];
        assert_eq!(synthesize_sample(&x, &n, 0.5).unwrap(), vec![0.5, 0.5]);
        assert_eq!(synthesize_sample(&x, &n, 0.0).unwrap(), x.to_vec());
        assert_eq!(synthesize_sample(&x, &n, 1.0).unwrap(), n.to_vec());
        assert!(matches!(
            synthesize_sample(&x, &[1.0], 0.5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    fn imbalanced() -> Dataset {
        // 20 majority (label 0), 8 minority (label 1)
        let mut labels = vec![0u8; 20];
        labels.extend(vec![1u8; 8]);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let features: Vec<f64> = (0..labels.len() * 2)
            .map(|_| rng.random_range(-3.0..3.0))
            .collect();
        toy(&labels, features, 2)
    }

    #[test]
    fn resample_reaches_exact_balance() {
        let ds = imbalanced();
        let params = SmoteParams {
            k: 3,
            target_ratio: 1.0,
            seed: 5,
        };
        let (out, prov) = fit_resample_with_provenance(&ds, &params).unwrap();
        let counts = class_counts(&out);
        assert_eq!(counts[&1], 20);
        assert_eq!(prov.len(), 12);
        // majority rows byte-identical, at their original positions
        assert_eq!(&out.features()[..ds.features().len()], ds.features());
        // convexity against recorded provenance
        for (s, p) in (ds.n_rows()..out.n_rows()).zip(&prov) {
            let expect =
                synthesize_sample(ds.row(p.seed_row), ds.row(p.neighbor_row), p.u).unwrap();
            for (a, b) in out.row(s).iter().zip(&expect) {
                assert!((a - b).abs() < 1e-9);
            }
            assert_eq!(out.labels()[s], 1);
            assert_eq!(out.weights()[s], 1.0);
            assert_eq!(out.protected()[s], ds.protected()[p.seed_row]);
        }
    }

    #[test]
    fn resample_is_deterministic() {
        let ds = imbalanced();
        let params = SmoteParams {
            k: 3,
            target_ratio: 1.0,
            seed: 123,
        };
        let a = fit_resample(&ds, &params).unwrap();
        let b = fit_resample(&ds, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn balanced_input_is_unchanged() {
        let labels = [0u8, 0, 0, 0, 1, 1, 1, 1];
        let features: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let ds = toy(&labels, features, 2);
        let out = fit_resample(&ds, &SmoteParams::default()).unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn single_class_and_tiny_minority_errors() {
        let features: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let ds = toy(&[0, 0, 0, 0], features, 2);
        assert!(matches!(
            fit_resample(&ds, &SmoteParams::default()),
            Err(Error::SingleClass)
        ));

        let features: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ds = toy(&[0, 0, 0, 0, 0, 0, 0, 0, 1, 1], features, 2);
        assert!(matches!(
            fit_resample(&ds, &SmoteParams::default()),
            Err(Error::DegenerateClass { .. })
        ));
    }
}
