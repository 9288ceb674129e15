//! Multinomial Naive Bayes with the evaluation harness used to compare
//! tokenization configurations.

mod cv;
mod metrics;
mod model;
mod persist;

pub use cv::{
    cross_validate, cross_validate_uris, fold_assignments, majority_baseline, CvOptions, OovPolicy,
};
pub use metrics::{ClassMetrics, EvalReport, FoldReport};
pub use model::{rank_scores, Classification, NaiveBayesModel, Prediction};
pub use persist::{read_model, write_model};

use crate::uri::TokenConfig;

/// Smoothing used when none is configured (add-one).
pub const DEFAULT_SMOOTHING: f64 = 1.0;

#[derive(Debug, thiserror::Error)]
pub enum NbError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("class {0:?} has no training documents")]
    EmptyClass(String),
    #[error("document labelled {0:?}, which is not a declared class")]
    UnknownClass(String),
    #[error("smoothing must be a positive finite number, got {0}")]
    BadSmoothing(f64),
    #[error("token configuration mismatch: model uses {expected}, bag uses {found}")]
    ConfigMismatch {
        expected: TokenConfig,
        found: TokenConfig,
    },
    #[error("cannot run {folds} folds over {items} items")]
    BadFolds { folds: usize, items: usize },
    #[error("model file line {line}: {detail}")]
    Format { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
