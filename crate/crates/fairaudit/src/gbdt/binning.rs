//! Quantile binning of feature columns for histogram split search.

use crate::error::{Error, Result};

/// One binned feature column: ascending cut points plus the bin index of
/// every row. Bin `b` holds values in `(cuts[b-1], cuts[b]]`; values above
/// the last cut fall in bin `cuts.len()`.
#[derive(Debug, Clone)]
pub struct BinnedFeature {
    pub cuts: Vec<f64>,
    pub bins: Vec<u16>,
}

/// All feature columns of a training matrix, binned once.
#[derive(Debug, Clone)]
pub struct BinnedDataset {
    pub features: Vec<BinnedFeature>,
    pub n_rows: usize,
}

pub fn bin_index(cuts: &[f64], value: f64) -> u16 {
    cuts.partition_point(|&c| value > c) as u16
}

fn column_cuts(sorted: &[f64], max_bins: usize) -> Vec<f64> {
    let mut distinct: Vec<f64> = Vec::new();
    for &v in sorted {
        if distinct.last().map_or(true, |&d| v > d) {
            distinct.push(v);
        }
    }
    let mut cuts = Vec::new();
    if distinct.len() <= max_bins {
        for w in distinct.windows(2) {
            cuts.push((w[0] + w[1]) / 2.0);
        }
    } else {
        let n = sorted.len();
        for b in 1..max_bins {
            let pos = b * n / max_bins;
            let cut = (sorted[pos - 1] + sorted[pos]) / 2.0;
            if cuts.last().map_or(true, |&c| cut > c) {
                cuts.push(cut);
            }
        }
    }
    cuts
}

/// Bin a row-major feature matrix. Rejects non-finite values.
pub fn bin_dataset(features: &[f64], n_cols: usize, max_bins: usize) -> Result<BinnedDataset> {
    if max_bins < 2 {
        return Err(Error::InvalidParameter("max_bins must be >= 2".into()));
    }
    let n_rows = if n_cols == 0 { 0 } else { features.len() / n_cols };
    let mut out = Vec::with_capacity(n_cols);
    for c in 0..n_cols {
        let mut col: Vec<f64> = Vec::with_capacity(n_rows);
        for r in 0..n_rows {
            let v = features[r * n_cols + c];
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature { row: r, column: c });
            }
            col.push(v);
        }
        let mut sorted = col.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cuts = column_cuts(&sorted, max_bins);
        let bins = col.iter().map(|&v| bin_index(&cuts, v)).collect();
        out.push(BinnedFeature { cuts, bins });
    }
    Ok(BinnedDataset {
        features: out,
        n_rows,
    })
}
