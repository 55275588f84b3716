//! Tabular data ingestion, schema binding, deterministic splitting, and the
//! bias-injection transform.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weighted tabular dataset with a binary label and one protected attribute.
///
/// Immutable after construction; transforms return new datasets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_cols: usize,
    labels: Vec<u8>,
    protected: Vec<String>,
    weights: Vec<f64>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        feature_names: Vec<String>,
        labels: Vec<u8>,
        protected: Vec<String>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let n_cols = feature_names.len();
        let n_rows = labels.len();
        if n_cols == 0 && !features.is_empty() {
            return Err(Error::InvalidDataset(
                "feature matrix non-empty but no feature names".into(),
            ));
        }
        if n_cols > 0 && features.len() != n_rows * n_cols {
            return Err(Error::InvalidDataset(format!(
                "feature matrix has {} cells, expected {} rows x {} columns",
                features.len(),
                n_rows,
                n_cols
            )));
        }
        if protected.len() != n_rows || weights.len() != n_rows {
            return Err(Error::InvalidDataset(
                "labels, protected and weights must have identical row counts".into(),
            ));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidDataset(format!(
                "label {l} outside {{0,1}}"
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidDataset("every weight must be > 0".into()));
        }
        Ok(Self {
            features,
            n_cols,
            labels,
            protected,
            weights,
            feature_names,
        })
    }

    /// Dataset with unit weights.
    pub fn unweighted(
        features: Vec<f64>,
        feature_names: Vec<String>,
        labels: Vec<u8>,
        protected: Vec<String>,
    ) -> Result<Self> {
        let w = vec![1.0; labels.len()];
        Self::new(features, feature_names, labels, protected, w)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn protected(&self) -> &[String] {
        &self.protected
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// New dataset keeping the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(idx.len() * self.n_cols);
        let mut labels = Vec::with_capacity(idx.len());
        let mut protected = Vec::with_capacity(idx.len());
        let mut weights = Vec::with_capacity(idx.len());
        for &i in idx {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
            protected.push(self.protected[i].clone());
            weights.push(self.weights[i]);
        }
        Dataset {
            features,
            n_cols: self.n_cols,
            labels,
            protected,
            weights,
            feature_names: self.feature_names.clone(),
        }
    }

    /// New dataset with the given weight vector.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Dataset> {
        Dataset::new(
            self.features.clone(),
            self.feature_names.clone(),
            self.labels.clone(),
            self.protected.clone(),
            weights,
        )
    }

    /// New dataset with extra rows appended.
    pub(crate) fn append_rows(
        &self,
        features: Vec<f64>,
        labels: Vec<u8>,
        protected: Vec<String>,
        weights: Vec<f64>,
    ) -> Result<Dataset> {
        let mut out = self.clone();
        out.features.extend(features);
        out.labels.extend(labels);
        out.protected.extend(protected);
        out.weights.extend(weights);
        Dataset::new(
            out.features,
            out.feature_names,
            out.labels,
            out.protected,
            out.weights,
        )
    }
}

/// Names the protected attribute, its two compared values, and which label is
/// the beneficial outcome. Fixes the sign convention of every group metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub protected_name: String,
    pub privileged_value: String,
    pub unprivileged_value: String,
    pub favourable_label: u8,
}

impl GroupSpec {
    pub fn new(
        protected_name: impl Into<String>,
        privileged_value: impl Into<String>,
        unprivileged_value: impl Into<String>,
        favourable_label: u8,
    ) -> Result<Self> {
        let spec = Self {
            protected_name: protected_name.into(),
            privileged_value: privileged_value.into(),
            unprivileged_value: unprivileged_value.into(),
            favourable_label,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.privileged_value == self.unprivileged_value {
            return Err(Error::InvalidGroupSpec(
                "privileged and unprivileged values must differ".into(),
            ));
        }
        if self.favourable_label > 1 {
            return Err(Error::InvalidGroupSpec(
                "favourable label must be 0 or 1".into(),
            ));
        }
        Ok(())
    }

    pub fn unfavourable_label(&self) -> u8 {
        1 - self.favourable_label
    }
}

/// Binds CSV columns to the dataset schema.
///
/// `feature_columns` empty means: every column except the label column (the
/// protected column is then carried both as a feature and as the protected
/// attribute). `weight_column` absent means unit weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaConfig {
    pub label_column: String,
    pub label_positive_token: String,
    pub protected_column: String,
    #[serde(default)]
    pub feature_columns: Vec<String>,
    #[serde(default)]
    pub weight_column: Option<String>,
}

impl SchemaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.feature_columns.contains(&self.label_column) {
            return Err(Error::InvalidSchema(format!(
                "label column {:?} listed among feature columns",
                self.label_column
            )));
        }
        if self.feature_columns.contains(&self.protected_column) {
            return Err(Error::InvalidSchema(format!(
                "protected column {:?} listed among feature columns",
                self.protected_column
            )));
        }
        Ok(())
    }
}

/// Disjoint train/test pair whose union is the input dataset.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
}

/// Load a CSV file under the given schema. Weights default to 1.0 and row
/// order is preserved.
pub fn load_csv(path: impl AsRef<Path>, schema: &SchemaConfig) -> Result<Dataset> {
    schema.validate()?;
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let col_index = |name: &str| -> Result<usize> {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };

    let label_idx = col_index(&schema.label_column)?;
    let protected_idx = col_index(&schema.protected_column)?;
    let weight_idx = match &schema.weight_column {
        Some(c) => Some(col_index(c)?),
        None => None,
    };

    let feature_idx: Vec<usize> = if schema.feature_columns.is_empty() {
        (0..header.len())
            .filter(|&i| i != label_idx && Some(i) != weight_idx)
            .collect()
    } else {
        schema
            .feature_columns
            .iter()
            .map(|c| col_index(c))
            .collect::<Result<_>>()?
    };
    let feature_names: Vec<String> = feature_idx.iter().map(|&i| header[i].clone()).collect();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut protected = Vec::new();
    let mut weights = Vec::new();
    // The token complementary to label_positive_token is fixed by the first
    // non-positive token encountered; any third token is an error.
    let mut negative_token: Option<String> = None;

    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_no + 1; // 1-based data row, header excluded
        for (&ci, name) in feature_idx.iter().zip(&feature_names) {
            let cell = record.get(ci).unwrap_or("").trim();
            let v: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                row,
                column: name.clone(),
                value: cell.to_string(),
            })?;
            features.push(v);
        }
        let label_cell = record.get(label_idx).unwrap_or("").trim().to_string();
        let label = if label_cell == schema.label_positive_token {
            1
        } else {
            match &negative_token {
                Some(neg) if *neg == label_cell => 0,
                Some(neg) => {
                    return Err(Error::BadLabelToken {
                        row,
                        value: label_cell,
                        positive: schema.label_positive_token.clone(),
                        negative: neg.clone(),
                    })
                }
                None => {
                    negative_token = Some(label_cell);
                    0
                }
            }
        };
        labels.push(label);
        protected.push(record.get(protected_idx).unwrap_or("").trim().to_string());
        match weight_idx {
            Some(wi) => {
                let cell = record.get(wi).unwrap_or("").trim();
                let w: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                    row,
                    column: schema.weight_column.clone().unwrap_or_default(),
                    value: cell.to_string(),
                })?;
                weights.push(w);
            }
            None => weights.push(1.0),
        }
    }

    Dataset::new(features, feature_names, labels, protected, weights)
}

/// Per-label row counts. Both labels are always present as keys.
pub fn class_counts(ds: &Dataset) -> BTreeMap<u8, usize> {
    let mut counts = BTreeMap::from([(0u8, 0usize), (1u8, 0usize)]);
    for &l in ds.labels() {
        *counts.entry(l).or_insert(0) += 1;
    }
    counts
}

/// Row counts per (group value, label) for the two spec groups. A group with
/// no rows gets zero cells; only both groups missing is an error.
pub fn group_counts(ds: &Dataset, spec: &GroupSpec) -> Result<BTreeMap<(String, u8), usize>> {
    spec.validate()?;
    let any_present = ds
        .protected()
        .iter()
        .any(|g| *g == spec.privileged_value || *g == spec.unprivileged_value);
    if !any_present && ds.n_rows() > 0 {
        return Err(Error::GroupAbsent(format!(
            "{} / {}",
            spec.privileged_value, spec.unprivileged_value
        )));
    }
    let mut counts = BTreeMap::new();
    for v in [&spec.privileged_value, &spec.unprivileged_value] {
        for l in [0u8, 1u8] {
            counts.insert((v.clone(), l), 0usize);
        }
    }
    for (g, &l) in ds.protected().iter().zip(ds.labels()) {
        if let Some(c) = counts.get_mut(&(g.clone(), l)) {
            *c += 1;
        }
    }
    Ok(counts)
}

/// Stratified split indices: per label class, shuffle deterministically and
/// take the rounded test share. Returned index lists are in ascending order.
pub fn stratified_split_indices(
    labels: &[u8],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction {test_fraction} outside (0,1)"
        )));
    }
    let mut per_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        per_class[l as usize].push(i);
    }
    for class in [0u8, 1u8] {
        let count = per_class[class as usize].len();
        if count < 2 {
            return Err(Error::DegenerateClass {
                label: class,
                count,
                need: 2,
            });
        }
    }
    // Per-class test counts by largest remainder, so the total test size is
    // round(fraction * N) while each class stays within one row of its share.
    let target_total = ((labels.len() as f64) * test_fraction).round() as usize;
    let exact: Vec<f64> = per_class
        .iter()
        .map(|c| c.len() as f64 * test_fraction)
        .collect();
    let mut n_test: Vec<usize> = exact.iter().map(|&e| e.floor() as usize).collect();
    let mut order: Vec<usize> = vec![0, 1];
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut leftover = target_total.saturating_sub(n_test.iter().sum::<usize>());
    for &c in &order {
        if leftover == 0 {
            break;
        }
        n_test[c] += 1;
        leftover -= 1;
    }
    for c in 0..2 {
        n_test[c] = n_test[c].clamp(1, per_class[c].len() - 1);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 0..2 {
        let idx = &mut per_class[c];
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[..n_test[c]]);
        train.extend_from_slice(&idx[n_test[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Deterministic stratified train/test split.
pub fn train_test_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitPair> {
    let (train_idx, test_idx) = stratified_split_indices(ds.labels(), test_fraction, seed)?;
    Ok(SplitPair {
        train: ds.select_rows(&train_idx),
        test: ds.select_rows(&test_idx),
    })
}

/// Deterministic stratified k-fold. Returns k (train, validation) pairs whose
/// validation folds partition the row set and preserve label proportions.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<SplitPair>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k}, need k >= 2")));
    }
    let counts = class_counts(ds);
    for (&label, &count) in &counts {
        if count < k {
            return Err(Error::DegenerateClass {
                label,
                count,
                need: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; ds.n_rows()];
    for class in [0u8, 1u8] {
        let mut idx: Vec<usize> = ds
            .labels()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            fold_of[i] = pos % k;
        }
    }
    let mut pairs = Vec::with_capacity(k);
    for fold in 0..k {
        let val: Vec<usize> = (0..ds.n_rows()).filter(|&i| fold_of[i] == fold).collect();
        let train: Vec<usize> = (0..ds.n_rows()).filter(|&i| fold_of[i] != fold).collect();
        pairs.push(SplitPair {
            train: ds.select_rows(&train),
            test: ds.select_rows(&val),
        });
    }
    Ok(pairs)
}

/// Fold assignment only, for callers that need row identities.
pub fn stratified_kfold_indices(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k = {k}, need k >= 2")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    for class in [0u8, 1u8] {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if idx.len() < k {
            return Err(Error::DegenerateClass {
                label: class,
                count: idx.len(),
                need: k,
            });
        }
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            folds[pos % k].push(i);
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Append `ceil(fraction * n_rows)` rows sampled with replacement from the
/// rows matching (inject_group, inject_label). Original rows are untouched.
pub fn inject_bias(
    ds: &Dataset,
    spec: &GroupSpec,
    inject_group: &str,
    inject_label: u8,
    fraction: f64,
    seed: u64,
) -> Result<Dataset> {
    spec.validate()?;
    if !(fraction >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "injection fraction {fraction} must be >= 0"
        )));
    }
    let pool: Vec<usize> = (0..ds.n_rows())
        .filter(|&i| ds.protected()[i] == inject_group && ds.labels()[i] == inject_label)
        .collect();
    if pool.is_empty() {
        return Err(Error::NoMatchingRows {
            group: inject_group.to_string(),
            label: inject_label,
        });
    }
    let n_add = (fraction * ds.n_rows() as f64).ceil() as usize;
    if n_add == 0 {
        return Ok(ds.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(n_add * ds.n_features());
    let mut labels = Vec::with_capacity(n_add);
    let mut protected = Vec::with_capacity(n_add);
    let mut weights = Vec::with_capacity(n_add);
    for _ in 0..n_add {
        let i = pool[rng.random_range(0..pool.len())];
        features.extend_from_slice(ds.row(i));
        labels.push(ds.labels()[i]);
        protected.push(ds.protected()[i].clone());
        weights.push(ds.weights()[i]);
    }
    ds.append_rows(features, labels, protected, weights)
}
