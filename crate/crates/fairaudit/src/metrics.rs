//! Group-fairness metrics and confusion-matrix performance suite.
//!
//! Sign conventions: group metrics are unprivileged minus privileged, so a
//! positive statistical parity difference means the unprivileged group
//! receives the favourable outcome more often. All rates optionally accept
//! per-instance weights; with `None` every row counts 1.

use serde::{Deserialize, Serialize};

use crate::data::GroupSpec;
use crate::error::{Error, Result};

/// Binary confusion matrix; the positive class is label 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Per-class supports (rows with true label 0 / 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSupport {
    pub negative: usize,
    pub positive: usize,
}

/// Derived classification rates. Ratios with a zero denominator are reported
/// as absent, never as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub fnr: Option<f64>,
    pub support: ClassSupport,
}

/// Which outcomes a fairness report was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportSource {
    #[serde(rename = "dataset-labels")]
    DatasetLabels,
    #[serde(rename = "model-predictions")]
    ModelPredictions,
}

/// Bundle of SPD, DI and (when true labels are available) EOD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub spd: f64,
    pub eod: Option<f64>,
    pub di: f64,
    pub source: ReportSource,
    pub spec: GroupSpec,
}

/// Count the confusion matrix of a binary prediction.
pub fn confusion_matrix(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut cm = ConfusionMatrix {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (0, 1) => cm.fp += 1,
            (1, 0) => cm.fn_ += 1,
            _ => cm.tn += 1,
        }
    }
    Ok(cm)
}

/// Accuracy, precision, recall, F1 and false negative rate from counts.
pub fn performance_metrics(cm: &ConfusionMatrix) -> Result<PerformanceReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyInput);
    }
    let ratio = |num: usize, den: usize| -> Option<f64> {
        if den == 0 {
            None
        } else {
            Some(num as f64 / den as f64)
        }
    };
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let fnr = ratio(cm.fn_, cm.tp + cm.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => None,
        _ => None,
    };
    Ok(PerformanceReport {
        accuracy: (cm.tp + cm.tn) as f64 / total as f64,
        precision,
        recall,
        f1,
        fnr,
        support: ClassSupport {
            negative: cm.fp + cm.tn,
            positive: cm.tp + cm.fn_,
        },
    })
}

fn check_weights(n: usize, weights: Option<&[f64]>) -> Result<()> {
    if let Some(w) = weights {
        if w.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: w.len(),
            });
        }
    }
    Ok(())
}

/// Weighted share of `group` rows whose outcome equals `favourable`.
pub fn selection_rate(
    outcomes: &[u8],
    groups: &[String],
    group: &str,
    favourable: u8,
    weights: Option<&[f64]>,
) -> Result<f64> {
    if outcomes.len() != groups.len() {
        return Err(Error::LengthMismatch {
            left: outcomes.len(),
            right: groups.len(),
        });
    }
    check_weights(outcomes.len(), weights)?;
    let mut total = 0.0;
    let mut fav = 0.0;
    for (i, (&o, g)) in outcomes.iter().zip(groups).enumerate() {
        if g == group {
            let w = weights.map_or(1.0, |w| w[i]);
            total += w;
            if o == favourable {
                fav += w;
            }
        }
    }
    if total == 0.0 {
        return Err(Error::GroupAbsent(group.to_string()));
    }
    Ok(fav / total)
}

/// Unprivileged favourable rate minus privileged favourable rate.
pub fn statistical_parity_difference(
    outcomes: &[u8],
    groups: &[String],
    spec: &GroupSpec,
    weights: Option<&[f64]>,
) -> Result<f64> {
    spec.validate()?;
    let unpriv = selection_rate(
        outcomes,
        groups,
        &spec.unprivileged_value,
        spec.favourable_label,
        weights,
    )?;
    let priv_ = selection_rate(
        outcomes,
        groups,
        &spec.privileged_value,
        spec.favourable_label,
        weights,
    )?;
    Ok(unpriv - priv_)
}

/// Ratio of unprivileged to privileged favourable rates. Both rates zero is
/// reported as 1.0 (equal benefit); only the privileged rate zero is +inf.
pub fn disparate_impact(
    outcomes: &[u8],
    groups: &[String],
    spec: &GroupSpec,
    weights: Option<&[f64]>,
) -> Result<f64> {
    spec.validate()?;
    let unpriv = selection_rate(
        outcomes,
        groups,
        &spec.unprivileged_value,
        spec.favourable_label,
        weights,
    )?;
    let priv_ = selection_rate(
        outcomes,
        groups,
        &spec.privileged_value,
        spec.favourable_label,
        weights,
    )?;
    if priv_ == 0.0 {
        if unpriv == 0.0 {
            return Ok(1.0);
        }
        return Ok(f64::INFINITY);
    }
    Ok(unpriv / priv_)
}

/// Difference in true positive rates (positive = the favourable label),
/// unprivileged minus privileged.
pub fn equal_opportunity_difference(
    y_true: &[u8],
    y_pred: &[u8],
    groups: &[String],
    spec: &GroupSpec,
    weights: Option<&[f64]>,
) -> Result<f64> {
    spec.validate()?;
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.len() != groups.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: groups.len(),
        });
    }
    check_weights(y_true.len(), weights)?;
    let tpr = |group: &str| -> Result<f64> {
        let mut total = 0.0;
        let mut hit = 0.0;
        for i in 0..y_true.len() {
            if groups[i] == group && y_true[i] == spec.favourable_label {
                let w = weights.map_or(1.0, |w| w[i]);
                total += w;
                if y_pred[i] == spec.favourable_label {
                    hit += w;
                }
            }
        }
        if total == 0.0 {
            return Err(Error::NoFavourableTruth {
                group: group.to_string(),
            });
        }
        Ok(hit / total)
    };
    Ok(tpr(&spec.unprivileged_value)? - tpr(&spec.privileged_value)?)
}

/// Assemble a fairness report. When `y_true` is supplied the outcomes are
/// treated as model predictions and EOD is included.
pub fn fairness_report(
    outcomes: &[u8],
    groups: &[String],
    spec: &GroupSpec,
    y_true: Option<&[u8]>,
    weights: Option<&[f64]>,
) -> Result<FairnessReport> {
    let spd = statistical_parity_difference(outcomes, groups, spec, weights)?;
    let di = disparate_impact(outcomes, groups, spec, weights)?;
    let (eod, source) = match y_true {
        Some(truth) => (
            Some(equal_opportunity_difference(
                truth, outcomes, groups, spec, weights,
            )?),
            ReportSource::ModelPredictions,
        ),
        None => (None, ReportSource::DatasetLabels),
    };
    Ok(FairnessReport {
        spd,
        eod,
        di,
        source,
        spec: spec.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn spec() -> GroupSpec {
        GroupSpec::new("g", "m", "f", 0).unwrap()
    }

    #[test]
    fn confusion_hand_count() {
        let cm = confusion_matrix(&[1, 1, 0, 0], &[1, 0, 0, 0]).unwrap();
        assert_eq!((cm.tp, cm.fn_, cm.fp, cm.tn), (1, 1, 0, 2));
    }

    #[test]
    fn confusion_identity() {
        let y = [1, 0, 1, 1, 0];
        let cm = confusion_matrix(&y, &y).unwrap();
        assert_eq!((cm.fp, cm.fn_), (0, 0));
        assert_eq!(cm.total(), 5);
    }

    #[test]
    fn confusion_errors() {
        assert!(matches!(
            confusion_matrix(&[1], &[1, 0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(confusion_matrix(&[], &[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn performance_recall_and_fnr() {
        let cm = ConfusionMatrix {
            tp: 38,
            fn_: 62,
            fp: 10,
            tn: 90,
        };
        let p = performance_metrics(&cm).unwrap();
        assert!((p.recall.unwrap() - 0.38).abs() < 1e-12);
        assert!((p.fnr.unwrap() - 0.62).abs() < 1e-12);
        assert!((p.recall.unwrap() + p.fnr.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn performance_perfect() {
        let cm = confusion_matrix(&[1, 0, 1], &[1, 0, 1]).unwrap();
        let p = performance_metrics(&cm).unwrap();
        assert_eq!(p.accuracy, 1.0);
        assert_eq!(p.precision, Some(1.0));
        assert_eq!(p.recall, Some(1.0));
        assert_eq!(p.f1, Some(1.0));
        assert_eq!(p.fnr, Some(0.0));
    }

    #[test]
    fn performance_zero_denominators() {
        let cm = ConfusionMatrix {
            tp: 0,
            fp: 0,
            fn_: 5,
            tn: 5,
        };
        let p = performance_metrics(&cm).unwrap();
        assert_eq!(p.precision, None);
        assert_eq!(p.recall, Some(0.0));
        assert_eq!(p.fnr, Some(1.0));
        assert_eq!(p.f1, None);
        assert_eq!(p.support.positive, 5);
    }

    #[test]
    fn selection_rate_hand() {
        let outcomes = [0, 0, 1, 0];
        let groups = strs(&["f", "f", "m", "m"]);
        let r = selection_rate(&outcomes, &groups, "f", 0, None).unwrap();
        assert_eq!(r, 1.0);
        let r = selection_rate(&outcomes, &groups, "m", 0, None).unwrap();
        assert_eq!(r, 0.5);
    }

    #[test]
    fn selection_rate_empty_group() {
        let outcomes = [0, 1];
        let groups = strs(&["f", "f"]);
        assert!(matches!(
            selection_rate(&outcomes, &groups, "m", 0, None),
            Err(Error::GroupAbsent(_))
        ));
    }

    #[test]
    fn spd_arithmetic() {
        // unpriv f rate 0.5, priv m rate 0.75
        let outcomes = [0, 1, 0, 1, 0, 1, 0, 0];
        let groups = strs(&["f", "f", "f", "f", "m", "m", "m", "m"]);
        let spd = statistical_parity_difference(&outcomes, &groups, &spec(), None).unwrap();
        assert!((spd - (0.5 - 0.75)).abs() < 1e-15);
    }

    #[test]
    fn spd_symmetric_distributions() {
        let outcomes = [0, 1, 0, 1];
        let groups = strs(&["f", "f", "m", "m"]);
        let spd = statistical_parity_difference(&outcomes, &groups, &spec(), None).unwrap();
        assert_eq!(spd, 0.0);
        let di = disparate_impact(&outcomes, &groups, &spec(), None).unwrap();
        assert_eq!(di, 1.0);
    }

    #[test]
    fn di_ratio_and_degenerate() {
        // unpriv 0.5, priv 0.75
        let outcomes = [0, 1, 0, 0, 0, 1];
        let groups = strs(&["f", "f", "m", "m", "m", "m"]);
        let di = disparate_impact(&outcomes, &groups, &spec(), None).unwrap();
        assert!((di - (0.5 / 0.75)).abs() < 1e-12);

        // privileged rate 0, unprivileged > 0 -> +inf
        let outcomes = [0, 1];
        let groups = strs(&["f", "m"]);
        let di = disparate_impact(&outcomes, &groups, &spec(), None).unwrap();
        assert!(di.is_infinite());

        // both rates 0 -> 1.0
        let outcomes = [1, 1];
        let di = disparate_impact(&outcomes, &groups, &spec(), None).unwrap();
        assert_eq!(di, 1.0);
    }

    #[test]
    fn eod_perfect_prediction_is_zero() {
        let y = [0, 1, 0, 1];
        let groups = strs(&["f", "f", "m", "m"]);
        let eod = equal_opportunity_difference(&y, &y, &groups, &spec(), None).unwrap();
        assert_eq!(eod, 0.0);
    }

    #[test]
    fn eod_hand_fixture() {
        // 20 rows, favourable = 0. unpriv (f): 10 rows with true 0, 6 predicted 0
        // -> TPR 0.6; priv (m): 10 rows with true 0, 9 predicted 0 -> TPR 0.9.
        let mut y_true = Vec::new();
        let mut y_pred = Vec::new();
        let mut groups = Vec::new();
        for i in 0..10 {
            y_true.push(0);
            y_pred.push(if i < 6 { 0 } else { 1 });
            groups.push("f".to_string());
        }
        for i in 0..10 {
            y_true.push(0);
            y_pred.push(if i < 9 { 0 } else { 1 });
            groups.push("m".to_string());
        }
        let eod = equal_opportunity_difference(&y_true, &y_pred, &groups, &spec(), None).unwrap();
        assert!((eod - (-0.3)).abs() < 1e-12);
    }

    #[test]
    fn eod_undefined_without_favourable_truth() {
        let y_true = [1, 1, 0, 0];
        let y_pred = [0, 1, 0, 0];
        let groups = strs(&["f", "f", "m", "m"]);
        assert!(matches!(
            equal_opportunity_difference(&y_true, &y_pred, &groups, &spec(), None),
            Err(Error::NoFavourableTruth { group }) if group == "f"
        ));
    }

    #[test]
    fn report_source_and_eod_presence() {
        let outcomes = [0, 1, 0, 1];
        let groups = strs(&["f", "f", "m", "m"]);
        let r = fairness_report(&outcomes, &groups, &spec(), None, None).unwrap();
        assert_eq!(r.source, ReportSource::DatasetLabels);
        assert!(r.eod.is_none());

        let truth = [0, 0, 0, 1];
        let r = fairness_report(&outcomes, &groups, &spec(), Some(&truth), None).unwrap();
        assert_eq!(r.source, ReportSource::ModelPredictions);
        assert!(r.eod.is_some());
    }

    #[test]
    fn weighted_rates() {
        let outcomes = [0, 1, 0, 1];
        let groups = strs(&["f", "f", "m", "m"]);
        let w = [3.0, 1.0, 1.0, 1.0];
        let r = selection_rate(&outcomes, &groups, "f", 0, Some(&w)).unwrap();
        assert!((r - 0.75).abs() < 1e-12);
    }
}
