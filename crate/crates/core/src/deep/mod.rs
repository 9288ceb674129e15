//! Deep (multi-level) classification: per-category similarity search, candidate
//! tree pruning and a final Naive Bayes decision among the candidates.

mod tree;
mod vectors;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use tree::{prune_tree, PrunedTree};
pub use vectors::{CandidateCategory, CategoryVectorIndex, SparseVector};

use crate::nb::{Classification, NaiveBayesModel, NbError, DEFAULT_SMOOTHING};
use crate::ontology::{CategoryIndex, CategoryPath, OntologyEntry};
use crate::uri::{TokenBag, TokenConfig, TokenMethod, Tokenizer, UriError, Variants};

/// Candidate categories collected before pruning.
pub const DEFAULT_CANDIDATES: usize = 10;

/// Character-gram space for the deep stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum GramScheme {
    /// 3-grams within each token.
    ThreeGram,
    /// 4- to 8-grams within each token.
    #[default]
    AllGram,
}

impl GramScheme {
    pub fn token_config(self) -> TokenConfig {
        let method = match self {
            GramScheme::ThreeGram => TokenMethod::TrigramsFromTokens,
            GramScheme::AllGram => TokenMethod::AllGramsFromTokens,
        };
        TokenConfig::new(method, Variants::TLD_NUMBERS)
    }
}

impl fmt::Display for GramScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GramScheme::ThreeGram => "3",
            GramScheme::AllGram => "all",
        })
    }
}

impl FromStr for GramScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "3" | "three" | "3gram" | "trigram" => Ok(GramScheme::ThreeGram),
            "all" | "allgram" | "all-gram" => Ok(GramScheme::AllGram),
            other => Err(format!("unknown gram scheme {other:?} (expected 3 or all)")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DeepError {
    #[error("category index is empty")]
    EmptyIndex,
    #[error("query has no features in common with any category")]
    NoCandidates,
    #[error("no candidate category has usable training documents")]
    NoDocuments,
    #[error(transparent)]
    Uri(#[from] UriError),
    #[error(transparent)]
    Nb(#[from] NbError),
    #[error("vector dump line {line}: {detail}")]
    Dump { line: usize, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Turns URIs and ontology entries into features for one gram scheme.
#[derive(Debug, Clone, Default)]
pub struct DeepFeaturizer {
    tokenizer: Tokenizer,
    scheme: GramScheme,
}

impl DeepFeaturizer {
    pub fn new(tokenizer: Tokenizer, scheme: GramScheme) -> Self {
        Self { tokenizer, scheme }
    }

    pub fn scheme(&self) -> GramScheme {
        self.scheme
    }

    pub fn config(&self) -> TokenConfig {
        self.scheme.token_config()
    }

    pub fn query_bag(&self, uri: &str) -> Result<TokenBag, UriError> {
        self.tokenizer.tokenize(uri, self.config())
    }

    /// URI features followed by title and description features.
    pub fn entry_features(&self, entry: &OntologyEntry) -> Vec<String> {
        let config = self.config();
        let mut features = self
            .tokenizer
            .tokenize(&entry.uri, config)
            .map(|b| b.features)
            .unwrap_or_default();
        for text in [&entry.title, &entry.description].into_iter().flatten() {
            features.extend(self.tokenizer.tokenize_text(text, config).features);
        }
        features
    }
}

/// How the deep decision was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeepMethod {
    /// Only one candidate had training documents.
    SingleCandidate,
    NaiveBayes,
    /// The query shared no feature with the candidates' documents; the best
    /// similarity candidate was taken.
    SimilarityFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepOutcome {
    pub path: CategoryPath,
    pub method: DeepMethod,
    /// Candidates dropped for lack of documents.
    pub dropped_candidates: Vec<CategoryPath>,
    /// Posterior ranking over the remaining candidates (empty unless Naive Bayes ran).
    pub ranking: Vec<(String, f64)>,
}

/// Picks one candidate path. Each candidate is trained on its own entries plus
/// the entries filed exactly at its retained ancestors.
pub fn classify_deep(
    tree: &PrunedTree,
    index: &CategoryIndex,
    query: &TokenBag,
    featurizer: &DeepFeaturizer,
) -> Result<DeepOutcome, DeepError> {
    let mut docs: Vec<(Vec<String>, String)> = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for candidate in tree.candidates() {
        let label = candidate.to_string();
        let before = docs.len();
        let sources = std::iter::once(candidate.clone()).chain(tree.retained_ancestors(candidate));
        for path in sources {
            for entry in index.entries_in(&path) {
                let features = featurizer.entry_features(entry);
                if !features.is_empty() {
                    docs.push((features, label.clone()));
                }
            }
        }
        if docs.len() > before {
            kept.push(candidate.clone());
        } else {
            dropped.push(candidate.clone());
        }
    }
    let Some(first) = kept.first().cloned() else {
        return Err(DeepError::NoDocuments);
    };
    if kept.len() == 1 {
        return Ok(DeepOutcome {
            path: first,
            method: DeepMethod::SingleCandidate,
            dropped_candidates: dropped,
            ranking: Vec::new(),
        });
    }
    let model = NaiveBayesModel::train_with_classes(
        featurizer.config(),
        kept.iter().map(|p| p.to_string()),
        docs.iter().map(|(f, l)| (f.as_slice(), l.as_str())),
        DEFAULT_SMOOTHING,
    )?;
    match model.classify_features(&query.features) {
        Classification::Label(p) => {
            let path = kept
                .iter()
                .find(|k| k.to_string() == p.label)
                .cloned()
                .expect("model classes are the kept candidates");
            Ok(DeepOutcome {
                path,
                method: DeepMethod::NaiveBayes,
                dropped_candidates: dropped,
                ranking: p.ranking,
            })
        }
        Classification::Unclassifiable { .. } => Ok(DeepOutcome {
            path: first,
            method: DeepMethod::SimilarityFallback,
            dropped_candidates: dropped,
            ranking: Vec::new(),
        }),
    }
}

/// True when the first `level` labels of both paths agree. Paths shorter than
/// `level` compare whole.
pub fn evaluate_levels(truth: &CategoryPath, predicted: &CategoryPath, level: usize) -> bool {
    truth
        .labels()
        .iter()
        .take(level)
        .eq(predicted.labels().iter().take(level))
}

/// Share of pairs correct at each level `1..=max_level`. Every pair counts in
/// every level's denominator.
pub fn level_accuracy<'a, I>(pairs: I, max_level: usize) -> Vec<f64>
where
    I: IntoIterator<Item = (&'a CategoryPath, &'a CategoryPath)>,
{
    let mut correct = vec![0usize; max_level];
    let mut n = 0usize;
    for (truth, pred) in pairs {
        n += 1;
        for (k, slot) in correct.iter_mut().enumerate() {
            *slot += usize::from(evaluate_levels(truth, pred, k + 1));
        }
    }
    correct
        .into_iter()
        .map(|c| if n == 0 { 0.0 } else { c as f64 / n as f64 })
        .collect()
}

/// Similarity search, pruning and the final decision for one URI.
#[derive(Debug, Clone)]
pub struct DeepClassifier<'a> {
    pub index: &'a CategoryIndex,
    pub vectors: &'a CategoryVectorIndex,
    pub featurizer: &'a DeepFeaturizer,
    pub candidates: usize,
}

/// Result of the whole deep stage for one URI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepTrace {
    pub candidates: Vec<CandidateCategory>,
    pub tree: PrunedTree,
    pub outcome: DeepOutcome,
}

impl<'a> DeepClassifier<'a> {
    pub fn new(
        index: &'a CategoryIndex,
        vectors: &'a CategoryVectorIndex,
        featurizer: &'a DeepFeaturizer,
    ) -> Self {
        Self {
            index,
            vectors,
            featurizer,
            candidates: DEFAULT_CANDIDATES,
        }
    }

    pub fn classify(&self, uri: &str, top_label: Option<&str>) -> Result<DeepTrace, DeepError> {
        let query = self.featurizer.query_bag(uri)?;
        self.classify_bag(&query, top_label)
    }

    pub fn classify_bag(
        &self,
        query: &TokenBag,
        top_label: Option<&str>,
    ) -> Result<DeepTrace, DeepError> {
        let candidates = self
            .vectors
            .top_candidates(query, self.candidates, top_label);
        if candidates.is_empty() {
            return Err(DeepError::NoCandidates);
        }
        let paths: Vec<CategoryPath> = candidates.iter().map(|c| c.path.clone()).collect();
        let tree = prune_tree(&paths);
        let outcome = classify_deep(&tree, self.index, query, self.featurizer)?;
        Ok(DeepTrace {
            candidates,
            tree,
            outcome,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{ingest_dmoz, DmozFormat, IngestOptions};

    fn p(s: &str) -> CategoryPath {
        CategoryPath::parse(s).unwrap()
    }

    #[test]
    fn level_checks() {
        let truth = p("c1/c2/c3");
        assert!(evaluate_levels(&truth, &p("c1/c2/x"), 2));
        assert!(!evaluate_levels(&truth, &p("c1/c2/x"), 3));
        assert!(evaluate_levels(&truth, &truth, 3));
        assert!(evaluate_levels(&truth, &truth, 5));
        let acc = level_accuracy([(&truth, &p("c1/c2/x")), (&truth, &p("c1/y"))], 3);
        assert_eq!(acc, vec![1.0, 0.5, 0.0]);
    }

    #[test]
    fn gram_scheme_parsing() {
        assert_eq!("3".parse::<GramScheme>().unwrap(), GramScheme::ThreeGram);
        assert_eq!("all".parse::<GramScheme>().unwrap(), GramScheme::AllGram);
        assert!("5".parse::<GramScheme>().is_err());
    }

    fn toy() -> CategoryIndex {
        let text = "Sports/Baseball\thttp://baseball.com/\tBaseball scores\t\n\
                    Sports/Baseball\thttp://pitching.com/\tPitching tips\t\n\
                    Sports/Soccer\thttp://soccer.com/\tSoccer league\t\n\
                    Arts/Music\thttp://guitar.com/\tGuitar lessons\t\n";
        ingest_dmoz(text.as_bytes(), DmozFormat::Tsv, &IngestOptions::default()).unwrap()
    }

    #[test]
    fn identical_entry_scores_one_and_mixed_scores_half() {
        let idx = toy();
        let f = DeepFeaturizer::new(Tokenizer::default(), GramScheme::AllGram);
        let v = CategoryVectorIndex::build(&idx, &f).unwrap();
        let soccer = idx.entries_in(&p("Sports/Soccer")).next().unwrap();
        let q = TokenBag::new(f.config(), f.entry_features(soccer));
        let top = v.top_candidates(&q, 10, None);
        assert_eq!(top[0].path, p("Sports/Soccer"));
        assert!((top[0].score - 1.0).abs() < 1e-12);

        let baseball = idx.by_surt("com,baseball)/").unwrap();
        let q = TokenBag::new(f.config(), f.entry_features(baseball));
        let top = v.top_candidates(&q, 10, None);
        assert_eq!(top[0].path, p("Sports/Baseball"));
        assert!(
            (top[0].score - 0.5).abs() < 1e-12,
            "one identical, one orthogonal entry"
        );
    }

    #[test]
    fn orthogonal_query_yields_nothing_and_top_filter_applies() {
        let idx = toy();
        let f = DeepFeaturizer::default();
        let v = CategoryVectorIndex::build(&idx, &f).unwrap();
        let q = f.query_bag("http://zzzzqqqq.com/").unwrap();
        assert!(v.top_candidates(&q, 10, None).is_empty());
        let q = f.query_bag("http://guitar-soccer.com/").unwrap();
        let arts = v.top_candidates(&q, 10, Some("Arts"));
        assert_eq!(arts.len(), 1);
        assert_eq!(arts[0].path, p("Arts/Music"));
        assert!(v.top_candidates(&q, 10, None).len() == 2);
    }

    #[test]
    fn deep_decision_among_candidates() {
        let idx = toy();
        let f = DeepFeaturizer::default();
        let v = CategoryVectorIndex::build(&idx, &f).unwrap();
        let c = DeepClassifier::new(&idx, &v, &f);
        let trace = c
            .classify("http://pitchingbaseball.org/", Some("Sports"))
            .unwrap();
        assert_eq!(trace.outcome.path, p("Sports/Baseball"));
        assert!(trace.tree.is_candidate(&trace.outcome.path));
    }

    #[test]
    fn dump_round_trip() {
        let idx = toy();
        let f = DeepFeaturizer::default();
        let v = CategoryVectorIndex::build(&idx, &f).unwrap();
        let mut buf = Vec::new();
        v.write_dump(&mut buf).unwrap();
        let back = CategoryVectorIndex::read_dump(buf.as_slice()).unwrap();
        let q = f.query_bag("http://soccerbaseball.com/").unwrap();
        assert_eq!(
            v.top_candidates(&q, 10, None),
            back.top_candidates(&q, 10, None)
        );
    }
}
