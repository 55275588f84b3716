//! Pre-processing bias mitigation by reweighing.
//!
//! Each (group, label) cell gets the weight
//! `W(g, l) = (w(g) * w(l)) / (N * w(g, l))` computed from weighted counts,
//! which makes group membership and label independent under the weighted
//! distribution while conserving total weight.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, GroupSpec};
use crate::error::{Error, Result};

/// Fitted cell weights for the four (group, label) combinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReweighingWeights {
    pub spec: GroupSpec,
    pub privileged_favourable: f64,
    pub privileged_unfavourable: f64,
    pub unprivileged_favourable: f64,
    pub unprivileged_unfavourable: f64,
}

impl ReweighingWeights {
    /// Cell weight for a row, or an error if its group is outside the spec.
    pub fn cell_weight(&self, group: &str, label: u8) -> Result<f64> {
        let favourable = label == self.spec.favourable_label;
        if group == self.spec.privileged_value {
            Ok(if favourable {
                self.privileged_favourable
            } else {
                self.privileged_unfavourable
            })
        } else if group == self.spec.unprivileged_value {
            Ok(if favourable {
                self.unprivileged_favourable
            } else {
                self.unprivileged_unfavourable
            })
        } else {
            Err(Error::GroupOutsideSpec(group.to_string()))
        }
    }
}

/// Fit reweighing cell weights on the dataset's weighted counts.
pub fn fit_reweighing(ds: &Dataset, spec: &GroupSpec) -> Result<ReweighingWeights> {
    spec.validate()?;
    // weighted counts: [group][label] with group 0 = privileged
    let mut cell = [[0.0f64; 2]; 2];
    let mut total = 0.0;
    for i in 0..ds.n_rows() {
        let g = &ds.protected()[i];
        let gi = if *g == spec.privileged_value {
            0
        } else if *g == spec.unprivileged_value {
            1
        } else {
            continue;
        };
        let w = ds.weights()[i];
        cell[gi][ds.labels()[i] as usize] += w;
        total += w;
    }
    let fav = spec.favourable_label as usize;
    let unfav = 1 - fav;
    for (gi, gname) in [(0, &spec.privileged_value), (1, &spec.unprivileged_value)] {
        for l in [fav, unfav] {
            if cell[gi][l] == 0.0 {
                return Err(Error::EmptyCell {
                    group: gname.clone(),
                    label: l as u8,
                });
            }
        }
    }
    let group_total = [cell[0][0] + cell[0][1], cell[1][0] + cell[1][1]];
    let label_total = [cell[0][0] + cell[1][0], cell[0][1] + cell[1][1]];
    let weight = |gi: usize, l: usize| group_total[gi] * label_total[l] / (total * cell[gi][l]);
    Ok(ReweighingWeights {
        spec: spec.clone(),
        privileged_favourable: weight(0, fav),
        privileged_unfavourable: weight(0, unfav),
        unprivileged_favourable: weight(1, fav),
        unprivileged_unfavourable: weight(1, unfav),
    })
}

/// Multiply each row's weight by its cell weight. Features and labels are
/// untouched; composes with prior weighting.
pub fn apply_reweighing(ds: &Dataset, w: &ReweighingWeights) -> Result<Dataset> {
    let mut weights = Vec::with_capacity(ds.n_rows());
    for i in 0..ds.n_rows() {
        let cw = w.cell_weight(&ds.protected()[i], ds.labels()[i])?;
        weights.push(ds.weights()[i] * cw);
    }
    ds.with_weights(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{disparate_impact, statistical_parity_difference};

    fn spec() -> GroupSpec {
        GroupSpec::new("g", "p", "u", 1).unwrap()
    }

    fn fixture(counts: [[usize; 2]; 2]) -> Dataset {
        // counts[group 0=priv][label]
        let mut labels = Vec::new();
        let mut protected = Vec::new();
        for (gi, gname) in [(0, "p"), (1, "u")] {
            for l in [0u8, 1u8] {
                for _ in 0..counts[gi][l as usize] {
                    labels.push(l);
                    protected.push(gname.to_string());
                }
            }
        }
        let features: Vec<f64> = (0..labels.len()).map(|i| i as f64).collect();
        Dataset::unweighted(features, vec!["x".into()], labels, protected).unwrap()
    }

    #[test]
    fn balanced_cells_give_unit_weights() {
        let ds = fixture([[3, 3], [3, 3]]);
        let w = fit_reweighing(&ds, &spec()).unwrap();
        for v in [
            w.privileged_favourable,
            w.privileged_unfavourable,
            w.unprivileged_favourable,
            w.unprivileged_unfavourable,
        ] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eight_row_fixture_weights() {
        // (u,fav)=1, (u,unfav)=3, (p,fav)=3, (p,unfav)=1 with fav = label 1
        let ds = fixture([[1, 3], [3, 1]]);
        let w = fit_reweighing(&ds, &spec()).unwrap();
        assert!((w.unprivileged_favourable - 2.0).abs() < 1e-12);
        assert!((w.unprivileged_unfavourable - 2.0 / 3.0).abs() < 1e-12);
        assert!((w.privileged_favourable - 2.0 / 3.0).abs() < 1e-12);
        assert!((w.privileged_unfavourable - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_cell_is_an_error() {
        let ds = fixture([[0, 4], [2, 2]]);
        assert!(matches!(
            fit_reweighing(&ds, &spec()),
            Err(Error::EmptyCell { .. })
        ));
    }

    #[test]
    fn apply_unit_weights_is_identity() {
        let ds = fixture([[3, 3], [3, 3]]);
        let w = fit_reweighing(&ds, &spec()).unwrap();
        let out = apply_reweighing(&ds, &w).unwrap();
        assert_eq!(out, ds);
    }

    #[test]
    fn apply_rejects_unknown_group() {
        let ds = fixture([[1, 1], [1, 1]]);
        let mut w = fit_reweighing(&ds, &spec()).unwrap();
        w.spec.privileged_value = "other".into();
        assert!(matches!(
            apply_reweighing(&ds, &w),
            Err(Error::GroupOutsideSpec(_))
        ));
    }

    #[test]
    fn reweighed_data_has_zero_parity() {
        let ds = fixture([[5, 2], [1, 7]]);
        let w = fit_reweighing(&ds, &spec()).unwrap();
        let out = apply_reweighing(&ds, &w).unwrap();
        let spd = statistical_parity_difference(
            out.labels(),
            out.protected(),
            &spec(),
            Some(out.weights()),
        )
        .unwrap();
        assert!(spd.abs() < 1e-9);
        let di =
            disparate_impact(out.labels(), out.protected(), &spec(), Some(out.weights())).unwrap();
        assert!((di - 1.0).abs() < 1e-9);
        // joint equals product of marginals under the weighted distribution
        let total: f64 = out.weights().iter().sum();
        assert!((total - ds.n_rows() as f64).abs() < 1e-9);
    }

    #[test]
    fn refit_on_weighted_data_is_unit() {
        let ds = fixture([[5, 2], [1, 7]]);
        let w = fit_reweighing(&ds, &spec()).unwrap();
        let out = apply_reweighing(&ds, &w).unwrap();
        let w2 = fit_reweighing(&out, &spec()).unwrap();
        for v in [
            w2.privileged_favourable,
            w2.privileged_unfavourable,
            w2.unprivileged_favourable,
            w2.unprivileged_unfavourable,
        ] {
            assert!((v - 1.0).abs() < 1e-9);
        }
    }
}
