use std::collections::{BTreeSet, HashSet};

use chrono::{DateTime, Utc};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::archive::{ArchiveGateway, CandidatePage};
use crate::deep::{
    CandidateCategory, CategoryVectorIndex, DeepClassifier, DeepFeaturizer, DeepMethod,
    DEFAULT_CANDIDATES,
};
use crate::nb::{Classification, NaiveBayesModel};
use crate::ontology::{
    lookup_requested, CategoryIndex, CategoryPath, HitSource, OntologyEntry, OntologyProvider,
};
use crate::rank::{default_earliest, rank, RankContext, RankWeights, Recommendation};
use crate::uri::{canonicalize_surt, TokenConfig, TokenMethod, Tokenizer, Variants};

/// Configuration of the ranking stage that is not per request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendOptions {
    /// "Now" for the temporal window.
    pub now: DateTime<Utc>,
    pub earliest: DateTime<Utc>,
    pub temporal_literal: bool,
    /// Candidate categories examined by the deep stage.
    pub deep_candidates: usize,
    /// Cap on candidates drawn from a whole top-level category in the shallow fallback.
    pub shallow_limit: usize,
}

impl Default for RecommendOptions {
    fn default() -> Self {
        Self {
            now: Utc::now(),
            earliest: default_earliest(),
            temporal_literal: false,
            deep_candidates: DEFAULT_CANDIDATES,
            shallow_limit: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationRequest {
    pub uri: String,
    pub datetime: Option<DateTime<Utc>>,
    pub top_n: usize,
    pub weights: RankWeights,
}

impl RecommendationRequest {
    pub fn new(uri: &str) -> Self {
        Self {
            uri: uri.to_string(),
            datetime: None,
            top_n: 10,
            weights: RankWeights::default(),
        }
    }
}

/// Which branch produced the candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    /// The requested URI is in the category index.
    OntologyPrimary,
    /// The secondary ontology names the requested URI as an official site.
    OntologySecondary,
    /// First-level and deep classification.
    ClassifiedDeep,
    /// First-level classification only; deep classification failed.
    ClassifiedShallow,
    /// Nothing could be classified.
    Unclassified,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::OntologyPrimary => "ontology-primary",
            Route::OntologySecondary => "ontology-secondary",
            Route::ClassifiedDeep => "classified-deep",
            Route::ClassifiedShallow => "classified-shallow",
            Route::Unclassified => "unclassified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmptyReason {
    Unclassifiable,
    NoCandidates,
    NoArchivedCandidates,
}

impl EmptyReason {
    pub fn as_str(self) -> &'static str {
        match self {
            EmptyReason::Unclassifiable => "unclassifiable",
            EmptyReason::NoCandidates => "no candidates",
            EmptyReason::NoArchivedCandidates => "no archived candidates",
        }
    }
}

/// What happened at each step of a recommendation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub route: Route,
    pub requested_surt: String,
    pub requested_datetime: DateTime<Utc>,
    pub categories: Vec<CategoryPath>,
    pub first_level: Option<(String, f64)>,
    pub deep_candidates: Vec<CandidateCategory>,
    pub deep_method: Option<DeepMethod>,
    pub deep_failure: Option<String>,
    /// Candidate URIs collected before archive filtering, request excluded.
    pub collected: Vec<String>,
    pub unarchived: Vec<String>,
    pub fetch_failures: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendResponse {
    pub request: RecommendationRequest,
    pub recommendations: Vec<Recommendation>,
    pub empty_reason: Option<EmptyReason>,
    pub trace: Trace,
}

/// Token set used for URI similarity.
pub fn similarity_tokens(tokenizer: &Tokenizer, uri: &str) -> BTreeSet<String> {
    tokenizer
        .tokenize(uri, TokenConfig::new(TokenMethod::Tokens, Variants::NONE))
        .map(|b| b.features.into_iter().collect())
        .unwrap_or_default()
}

/// Trains the first-level model on every index entry's URI, labelled with its
/// top-level category. Entries whose URI yields no features are skipped.
pub fn train_first_level(
    index: &CategoryIndex,
    tokenizer: &Tokenizer,
    config: TokenConfig,
    smoothing: f64,
) -> Result<NaiveBayesModel, PipelineError> {
    let bags: Vec<(crate::uri::TokenBag, &str)> = index
        .entries()
        .iter()
        .filter_map(|e| {
            let bag = tokenizer.tokenize(&e.uri, config).ok()?;
            (!bag.is_empty()).then_some((bag, e.category.top()))
        })
        .collect();
    Ok(NaiveBayesModel::train(
        bags.iter().map(|(b, l)| (b, *l)),
        smoothing,
    )?)
}

/// Everything needed to answer requests end to end.
pub struct Recommender<'a> {
    pub index: &'a CategoryIndex,
    pub secondary: &'a dyn OntologyProvider,
    pub first_level: &'a NaiveBayesModel,
    pub vectors: &'a CategoryVectorIndex,
    pub featurizer: &'a DeepFeaturizer,
    pub tokenizer: &'a Tokenizer,
    pub gateway: &'a ArchiveGateway,
    pub options: RecommendOptions,
}

impl<'a> Recommender<'a> {
    pub fn recommend(
        &self,
        req: &RecommendationRequest,
    ) -> Result<RecommendResponse, PipelineError> {
        req.weights.validate()?;
        if req.top_n == 0 {
            return Err(PipelineError::Config("top must be at least 1".into()));
        }
        let surt = canonicalize_surt(&req.uri)?;
        let requested = req.datetime.unwrap_or(self.options.now);
        let mut trace = Trace {
            route: Route::Unclassified,
            requested_surt: surt.clone(),
            requested_datetime: requested,
            categories: Vec::new(),
            first_level: None,
            deep_candidates: Vec::new(),
            deep_method: None,
            deep_failure: None,
            collected: Vec::new(),
            unarchived: Vec::new(),
            fetch_failures: Vec::new(),
            warnings: Vec::new(),
        };

        let entries = self.collect_candidates(&req.uri, &mut trace)?;
        let mut seen = HashSet::from([surt.clone()]);
        let uris: Vec<String> = entries
            .into_iter()
            .filter(|e| seen.insert(e.surt.clone()))
            .map(|e| e.uri)
            .collect();
        trace.collected = uris.clone();

        let respond = |trace: Trace, recs: Vec<Recommendation>, reason: Option<EmptyReason>| {
            RecommendResponse {
                request: req.clone(),
                recommendations: recs,
                empty_reason: reason,
                trace,
            }
        };
        if trace.route == Route::Unclassified {
            return Ok(respond(
                trace,
                Vec::new(),
                Some(EmptyReason::Unclassifiable),
            ));
        }
        if uris.is_empty() {
            return Ok(respond(trace, Vec::new(), Some(EmptyReason::NoCandidates)));
        }

        let mut archived: Vec<CandidatePage> = Vec::new();
        for (uri, result) in uris.iter().zip(self.gateway.gather_all(&uris, requested)) {
            match result {
                Ok(Some(page)) => archived.push(page),
                Ok(None) => trace.unarchived.push(uri.clone()),
                Err(e) => {
                    warn!("evidence for {uri} unavailable: {e}");
                    trace.fetch_failures.push((uri.clone(), e.to_string()));
                }
            }
        }
        info!(
            "{}: {} candidates, {} archived",
            req.uri,
            uris.len(),
            archived.len()
        );
        if archived.is_empty() {
            return Ok(respond(
                trace,
                Vec::new(),
                Some(EmptyReason::NoArchivedCandidates),
            ));
        }
        let ctx = RankContext {
            weights: req.weights,
            requested,
            current: self.options.now,
            earliest: self.options.earliest,
            temporal_literal: self.options.temporal_literal,
            request_tokens: similarity_tokens(self.tokenizer, &req.uri),
        };
        let recs = rank(archived, &ctx, req.top_n, |u| {
            similarity_tokens(self.tokenizer, u)
        })?;
        Ok(respond(trace, recs, None))
    }

    /// Ontology lookup first, then first-level and deep classification.
    fn collect_candidates(
        &self,
        uri: &str,
        trace: &mut Trace,
    ) -> Result<Vec<OntologyEntry>, PipelineError> {
        let lookup = lookup_requested(self.index, self.secondary, uri)?;
        if let Some(w) = lookup.warning {
            trace
                .warnings
                .push(format!("secondary ontology unavailable: {w}"));
        }
        if let Some(hit) = lookup.hit {
            trace.route = match hit.source {
                HitSource::Primary => Route::OntologyPrimary,
                HitSource::Secondary => Route::OntologySecondary,
            };
            trace.categories = hit.categories;
            return Ok(hit.entries);
        }

        let bag = self.tokenizer.tokenize(uri, self.first_level.config())?;
        let top = match self.first_level.classify(&bag)? {
            Classification::Label(p) => {
                trace.first_level = Some((p.label.clone(), p.ranking[0].1));
                p.label
            }
            Classification::Unclassifiable { .. } => return Ok(Vec::new()),
        };

        let deep = DeepClassifier {
            index: self.index,
            vectors: self.vectors,
            featurizer: self.featurizer,
            candidates: self.options.deep_candidates,
        };
        match deep.classify(uri, Some(&top)) {
            Ok(t) => {
                trace.route = Route::ClassifiedDeep;
                trace.deep_candidates = t.candidates;
                trace.deep_method = Some(t.outcome.method);
                trace.categories = vec![t.outcome.path.clone()];
                Ok(self.index.entries_in(&t.outcome.path).cloned().collect())
            }
            Err(e) => {
                trace.route = Route::ClassifiedShallow;
                trace.deep_failure = Some(e.to_string());
                let top_path = CategoryPath::new([top.clone()])
                    .map_err(|e| PipelineError::Config(e.to_string()))?;
                trace.categories = vec![top_path.clone()];
                Ok(self
                    .index
                    .entries_under(&top_path)
                    .take(self.options.shallow_limit)
                    .cloned()
                    .collect())
            }
        }
    }
}
