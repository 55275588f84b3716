//! The five credit-default case studies and cross-validation.
//!
//! Case pipelines (all on a stratified 7:3 split unless configured
//! otherwise; transforms touch the training split only):
//!
//! 1. plain weighted GBDT;
//! 2. SMOTE, then GBDT;
//! 3. reweighing, then weighted GBDT;
//! 4. SMOTE, then reweighing, then weighted GBDT;
//! 5. bias injection, reweighing, then weighted GBDT, with the training-data
//!    fairness reported before and after mitigation.
//!
//! Every case derives its own random streams from (master seed, case id);
//! the train/test split uses the master seed alone so all cases compare on
//! the same test rows.

use serde::{Deserialize, Serialize};

use crate::data::{
    inject_bias, stratified_kfold, train_test_split, Dataset, GroupSpec, SchemaConfig,
};
use crate::error::{Error, Result};
use crate::gbdt::{predict_label, train, GbdtParams};
use crate::metrics::{
    confusion_matrix, fairness_report, performance_metrics, FairnessReport, PerformanceReport,
};
use crate::reweighing::{apply_reweighing, fit_reweighing};
use crate::smote::{fit_resample, SmoteParams};

pub const CV_FOLDS: usize = 5;
pub const PREDICTION_THRESHOLD: f64 = 0.5;

/// Case-5 manipulation: append `fraction * n` rows drawn from the rows
/// matching (group, label).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectionConfig {
    pub group: String,
    pub label: u8,
    pub fraction: f64,
}

/// Full experiment configuration; one document drives all five cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: SchemaConfig,
    pub group: GroupSpec,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub smote: SmoteParams,
    #[serde(default)]
    pub gbdt: GbdtParams,
    /// Defaults to adding 30% (privileged group, unfavourable label) rows.
    #[serde(default)]
    pub injection: Option<InjectionConfig>,
}

fn default_test_fraction() -> f64 {
    0.3
}
fn default_seed() -> u64 {
    42
}

impl ExperimentConfig {
    pub fn injection_or_default(&self) -> InjectionConfig {
        self.injection.clone().unwrap_or(InjectionConfig {
            group: self.group.privileged_value.clone(),
            label: self.group.unfavourable_label(),
            fraction: 0.3,
        })
    }
}

/// All reports produced by one case run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case: u8,
    pub performance: PerformanceReport,
    /// Fairness of test-set predictions.
    pub fairness: FairnessReport,
    /// Training-data (dataset-label) fairness before mitigation, cases 3-5.
    pub train_fairness_before: Option<FairnessReport>,
    /// Weighted training-data fairness after mitigation, cases 3-5.
    pub train_fairness_after: Option<FairnessReport>,
    /// Unweighted counterpart of the after-mitigation figure, case 5 only.
    pub train_fairness_after_unweighted: Option<FairnessReport>,
    pub cv_accuracy_mean: f64,
    pub cv_accuracy_std: f64,
}

/// Results of all five cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub cases: Vec<CaseResult>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Independent stream seed for (master seed, case id, stream tag).
fn derive_seed(master: u64, case: u8, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64((case as u64) << 8 | stream))
}

/// Per-fold accuracies of plain (case-1 style) weighted GBDT training.
pub fn cross_validate_scores(ds: &Dataset, config: &ExperimentConfig, seed: u64) -> Result<Vec<f64>> {
    let folds = stratified_kfold(ds, CV_FOLDS, seed)?;
    let mut scores = Vec::with_capacity(folds.len());
    for pair in &folds {
        let model = train(&pair.train, &config.gbdt)?;
        let preds = predict_label(
            &model,
            pair.test.features(),
            pair.test.n_features(),
            PREDICTION_THRESHOLD,
        )?;
        let cm = confusion_matrix(pair.test.labels(), &preds)?;
        scores.push((cm.tp + cm.tn) as f64 / cm.total() as f64);
    }
    Ok(scores)
}

/// Mean and population standard deviation of the k fold accuracies.
pub fn cross_validate(ds: &Dataset, config: &ExperimentConfig, seed: u64) -> Result<(f64, f64)> {
    let scores = cross_validate_scores(ds, config, seed)?;
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / scores.len() as f64;
    Ok((mean, var.sqrt()))
}

/// Run one of the five case pipelines on the full dataset.
pub fn run_case(case_id: u8, config: &ExperimentConfig, data: &Dataset) -> Result<CaseResult> {
    if !(1..=5).contains(&case_id) {
        return Err(Error::InvalidParameter(format!(
            "case id {case_id} outside 1..=5"
        )));
    }
    let spec = &config.group;
    let split = train_test_split(data, config.test_fraction, config.seed)?;

    let mut train_fairness_before = None;
    let mut train_fairness_after = None;
    let mut train_fairness_after_unweighted = None;

    let train_ds = match case_id {
        1 => split.train,
        2 => {
            let mut smote = config.smote.clone();
            smote.seed = derive_seed(config.seed, case_id, 1);
            fit_resample(&split.train, &smote)?
        }
        3 | 4 => {
            let base = if case_id == 4 {
                let mut smote = config.smote.clone();
                smote.seed = derive_seed(config.seed, case_id, 1);
                fit_resample(&split.train, &smote)?
            } else {
                split.train
            };
            train_fairness_before = Some(fairness_report(
                base.labels(),
                base.protected(),
                spec,
                None,
                None,
            )?);
            let weights = fit_reweighing(&base, spec)?;
            let reweighed = apply_reweighing(&base, &weights)?;
            train_fairness_after = Some(fairness_report(
                reweighed.labels(),
                reweighed.protected(),
                spec,
                None,
                Some(reweighed.weights()),
            )?);
            reweighed
        }
        _ => {
            let injection = config.injection_or_default();
            let injected = inject_bias(
                &split.train,
                spec,
                &injection.group,
                injection.label,
                injection.fraction,
                derive_seed(config.seed, case_id, 2),
            )?;
            train_fairness_before = Some(fairness_report(
                injected.labels(),
                injected.protected(),
                spec,
                None,
                None,
            )?);
            let weights = fit_reweighing(&injected, spec)?;
            let reweighed = apply_reweighing(&injected, &weights)?;
            train_fairness_after = Some(fairness_report(
                reweighed.labels(),
                reweighed.protected(),
                spec,
                None,
                Some(reweighed.weights()),
            )?);
            train_fairness_after_unweighted = Some(fairness_report(
                reweighed.labels(),
                reweighed.protected(),
                spec,
                None,
                None,
            )?);
            reweighed
        }
    };

    let model = train(&train_ds, &config.gbdt)?;
    let preds = predict_label(
        &model,
        split.test.features(),
        split.test.n_features(),
        PREDICTION_THRESHOLD,
    )?;
    let cm = confusion_matrix(split.test.labels(), &preds)?;
    let performance = performance_metrics(&cm)?;
    let fairness = fairness_report(
        &preds,
        split.test.protected(),
        spec,
        Some(split.test.labels()),
        None,
    )?;
    let (cv_accuracy_mean, cv_accuracy_std) =
        cross_validate(&train_ds, config, derive_seed(config.seed, case_id, 3))?;

    Ok(CaseResult {
        case: case_id,
        performance,
        fairness,
        train_fairness_before,
        train_fairness_after,
        train_fairness_after_unweighted,
        cv_accuracy_mean,
        cv_accuracy_std,
    })
}

/// Run cases 1-5 with one seed. A failing case aborts with its id attached.
pub fn run_all(config: &ExperimentConfig, data: &Dataset) -> Result<RunSummary> {
    let mut cases = Vec::with_capacity(5);
    for case_id in 1..=5 {
        let result = run_case(case_id, config, data).map_err(|e| Error::CaseFailed {
            case: case_id,
            source: Box::new(e),
        })?;
        cases.push(result);
    }
    Ok(RunSummary {
        seed: config.seed,
        cases,
    })
}
