//! Group-fairness auditing toolkit.
//!
//! The pipeline is built around [`data::Dataset`], a weighted tabular dataset
//! with a binary label and one protected attribute. On top of it sit:
//!
//! - [`metrics`] — group-fairness metrics (statistical parity difference,
//!   disparate impact, equal opportunity difference) and the confusion-matrix
//!   performance suite, all weight-aware;
//! - [`reweighing`] — pre-processing bias mitigation that makes group and
//!   label statistically independent under the weighted distribution;
//! - [`smote`] — synthetic minority over-sampling by nearest-neighbour
//!   interpolation;
//! - [`gbdt`] — weighted gradient-boosted decision trees for binary
//!   classification with logistic loss;
//! - [`experiments`] — the five credit-default case studies plus stratified
//!   5-fold cross-validation;
//! - [`report`] — deterministic JSON and plain-text table emitters.
//!
//! Every operation is a pure function of its inputs and an explicit seed.

pub mod data;
pub mod error;
pub mod experiments;
pub mod gbdt;
pub mod metrics;
pub mod report;
pub mod reweighing;
pub mod smote;

pub use data::{Dataset, GroupSpec, SchemaConfig, SplitPair};
pub use error::Error;
pub use metrics::{ConfusionMatrix, FairnessReport, PerformanceReport};
