//! End-to-end orchestration: recommendation for one lost URI, held-out
//! evaluation of the deep stage and access-log filtering.

mod access_log;
mod evaluate;
mod recommend;

pub use access_log::{
    check_uri, filter_access_log, open_maybe_gzip, AccessLogRecord, LanguageCheck, LogFilter,
    LogFilterStats, Rejection, HTML_EXTENSIONS,
};
pub use evaluate::{
    analyze_requests, evaluate_deep, split_holdout, DeepEvalItem, DeepEvalOptions, DeepEvalReport,
    LevelRow,
};
pub use recommend::{
    similarity_tokens, train_first_level, EmptyReason, RecommendOptions, RecommendResponse,
    RecommendationRequest, Recommender, Route, Trace,
};

use crate::deep::DeepError;
use crate::nb::NbError;
use crate::rank::RankError;
use crate::uri::UriError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Uri(#[from] UriError),
    #[error(transparent)]
    Nb(#[from] NbError),
    #[error(transparent)]
    Deep(#[from] DeepError),
    #[error(transparent)]
    Rank(#[from] RankError),
}
