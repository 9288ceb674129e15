use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::NbError;
use crate::uri::{TokenBag, TokenConfig};

/// Multinomial Naive Bayes over string features with add-α smoothing.
///
/// Classes are kept in lexicographic order; that order breaks ties.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    pub(crate) config: TokenConfig,
    pub(crate) smoothing: f64,
    pub(crate) classes: Vec<String>,
    pub(crate) doc_counts: Vec<u64>,
    /// Feature string → row in the count matrices.
    pub(crate) vocabulary: HashMap<String, usize>,
    /// Row-major `[feature][class]` raw counts.
    pub(crate) counts: Vec<u64>,
    pub(crate) class_totals: Vec<u64>,
    class_log_prior: Vec<f64>,
    /// Row-major `[feature][class]` smoothed log-likelihoods.
    log_likelihood: Vec<f64>,
    /// Log-likelihood of a feature never seen with a class, per class.
    unseen_log_likelihood: Vec<f64>,
}

/// Ranked outcome of a classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: String,
    /// Every class with its normalized posterior, best first.
    pub ranking: Vec<(String, f64)>,
    /// Features that contributed (in-vocabulary, counted with multiplicity).
    pub used_features: usize,
    pub ignored_features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Classification {
    Label(Prediction),
    /// No in-vocabulary feature was left to score.
    Unclassifiable {
        ignored_features: usize,
    },
}

impl Classification {
    pub fn label(&self) -> Option<&str> {
        match self {
            Classification::Label(p) => Some(&p.label),
            Classification::Unclassifiable { .. } => None,
        }
    }

    pub fn prediction(&self) -> Option<&Prediction> {
        match self {
            Classification::Label(p) => Some(p),
            Classification::Unclassifiable { .. } => None,
        }
    }
}

impl NaiveBayesModel {
    /// Trains on labelled bags; the classes are the labels that occur.
    pub fn train<'a, I>(corpus: I, smoothing: f64) -> Result<Self, NbError>
    where
        I: IntoIterator<Item = (&'a TokenBag, &'a str)>,
    {
        let corpus: Vec<(&TokenBag, &str)> = corpus.into_iter().collect();
        let Some(config) = corpus.first().map(|(b, _)| b.config()) else {
            return Err(NbError::EmptyCorpus);
        };
        if let Some((bag, _)) = corpus.iter().find(|(b, _)| b.config() != config) {
            return Err(NbError::ConfigMismatch {
                expected: config,
                found: bag.config(),
            });
        }
        let classes: BTreeSet<&str> = corpus.iter().map(|(_, l)| *l).collect();
        Self::train_with_classes(
            config,
            classes,
            corpus.iter().map(|(b, l)| (b.features.as_slice(), *l)),
            smoothing,
        )
    }

    /// Trains with an explicit class list. Documents whose label is not listed
    /// are an error, as is a listed class without documents.
    pub fn train_with_classes<'a, C, S, D>(
        config: TokenConfig,
        classes: C,
        docs: D,
        smoothing: f64,
    ) -> Result<Self, NbError>
    where
        C: IntoIterator<Item = S>,
        S: AsRef<str>,
        D: IntoIterator<Item = (&'a [String], &'a str)>,
    {
        if !(smoothing > 0.0 && smoothing.is_finite()) {
            return Err(NbError::BadSmoothing(smoothing));
        }
        let classes: Vec<String> = classes
            .into_iter()
            .map(|c| c.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if classes.is_empty() {
            return Err(NbError::EmptyCorpus);
        }
        let class_id: HashMap<&str, usize> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();
        let n = classes.len();

        let mut doc_counts = vec![0u64; n];
        let mut vocabulary: HashMap<String, usize> = HashMap::new();
        let mut counts: Vec<u64> = Vec::new();
        let mut class_totals = vec![0u64; n];
        for (features, label) in docs {
            let &c = class_id
                .get(label)
                .ok_or_else(|| NbError::UnknownClass(label.to_string()))?;
            doc_counts[c] += 1;
            for f in features {
                let next = vocabulary.len();
                let row = *vocabulary.entry(f.clone()).or_insert_with(|| {
                    counts.extend(std::iter::repeat_n(0, n));
                    next
                });
                counts[row * n + c] += 1;
                class_totals[c] += 1;
            }
        }
        if doc_counts.iter().sum::<u64>() == 0 {
            return Err(NbError::EmptyCorpus);
        }
        if let Some(c) = doc_counts.iter().position(|&d| d == 0) {
            return Err(NbError::EmptyClass(classes[c].clone()));
        }
        Ok(Self::from_counts(
            config,
            smoothing,
            classes,
            doc_counts,
            vocabulary,
            counts,
            class_totals,
        ))
    }

    pub(crate) fn from_counts(
        config: TokenConfig,
        smoothing: f64,
        classes: Vec<String>,
        doc_counts: Vec<u64>,
        vocabulary: HashMap<String, usize>,
        counts: Vec<u64>,
        class_totals: Vec<u64>,
    ) -> Self {
        let n = classes.len();
        let total_docs: u64 = doc_counts.iter().sum();
        let class_log_prior = doc_counts
            .iter()
            .map(|&d| (d as f64).ln() - (total_docs as f64).ln())
            .collect();
        let v = vocabulary.len() as f64;
        let denominators: Vec<f64> = class_totals
            .iter()
            .map(|&t| (t as f64 + smoothing * v).ln())
            .collect();
        let log_likelihood = counts
            .iter()
            .enumerate()
            .map(|(i, &k)| (k as f64 + smoothing).ln() - denominators[i % n])
            .collect();
        let unseen_log_likelihood = denominators.iter().map(|d| smoothing.ln() - d).collect();
        Self {
            config,
            smoothing,
            classes,
            doc_counts,
            vocabulary,
            counts,
            class_totals,
            class_log_prior,
            log_likelihood,
            unseen_log_likelihood,
        }
    }

    pub fn config(&self) -> TokenConfig {
        self.config
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn contains_feature(&self, feature: &str) -> bool {
        self.vocabulary.contains_key(feature)
    }

    pub fn class_log_prior(&self) -> &[f64] {
        &self.class_log_prior
    }

    /// Smoothed `ln P(feature | class)`; defined for unseen features too.
    pub fn feature_log_likelihood(&self, feature: &str, class: usize) -> f64 {
        match self.vocabulary.get(feature) {
            Some(&row) => self.log_likelihood[row * self.classes.len() + class],
            None => self.unseen_log_likelihood[class],
        }
    }

    /// Unnormalized joint log-probabilities per class, ignoring out-of-vocabulary
    /// features. Also returns how many features were used and ignored.
    pub fn joint_log_scores(&self, features: &[String]) -> (Vec<f64>, usize, usize) {
        let n = self.classes.len();
        let mut scores = self.class_log_prior.clone();
        let (mut used, mut ignored) = (0, 0);
        for f in features {
            match self.vocabulary.get(f) {
                Some(&row) => {
                    used += 1;
                    for (s, ll) in scores
                        .iter_mut()
                        .zip(&self.log_likelihood[row * n..(row + 1) * n])
                    {
                        *s += ll;
                    }
                }
                None => ignored += 1,
            }
        }
        (scores, used, ignored)
    }

    /// Classifies a bag produced with the model's token configuration.
    pub fn classify(&self, bag: &TokenBag) -> Result<Classification, NbError> {
        if bag.config() != self.config {
            return Err(NbError::ConfigMismatch {
                expected: self.config,
                found: bag.config(),
            });
        }
        Ok(self.classify_features(&bag.features))
    }

    /// Classifies raw features, skipping the configuration check.
    pub fn classify_features(&self, features: &[String]) -> Classification {
        let (scores, used, ignored) = self.joint_log_scores(features);
        if used == 0 {
            return Classification::Unclassifiable {
                ignored_features: ignored,
            };
        }
        let ranking = rank_scores(&self.classes, &scores);
        Classification::Label(Prediction {
            label: ranking[0].0.clone(),
            ranking,
            used_features: used,
            ignored_features: ignored,
        })
    }
}

/// Softmax-normalizes log scores and orders classes by posterior, best first.
/// The sort is stable, so equal posteriors keep class order.
pub fn rank_scores(classes: &[String], log_scores: &[f64]) -> Vec<(String, f64)> {
    let max = log_scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = log_scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    let mut ranking: Vec<(String, f64, f64)> = classes
        .iter()
        .zip(log_scores)
        .zip(&exps)
        .map(|((c, &s), &e)| (c.clone(), s, e / z))
        .collect();
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranking.into_iter().map(|(c, _, p)| (c, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uri::{TokenMethod, Variants};

    const CFG: TokenConfig = TokenConfig::new(TokenMethod::Tokens, Variants::NONE);

    fn bag(words: &[&str]) -> TokenBag {
        TokenBag::new(CFG, words.iter().map(|w| w.to_string()).collect())
    }

    #[test]
    fn separable_classes() {
        let docs = [(bag(&["apple"]), "A"), (bag(&["banana"]), "B")];
        let m = NaiveBayesModel::train(docs.iter().map(|(b, l)| (b, *l)), 1.0).unwrap();
        let p = m.classify(&bag(&["apple"])).unwrap();
        let p = p.prediction().unwrap();
        assert_eq!(p.label, "A");
        assert!(p.ranking[0].1 > 0.5);
    }

    #[test]
    fn symmetric_corpus_ties_to_first_class() {
        let docs = [(bag(&["x", "y"]), "B"), (bag(&["x", "y"]), "A")];
        let m = NaiveBayesModel::train(docs.iter().map(|(b, l)| (b, *l)), 1.0).unwrap();
        let p = m.classify(&bag(&["x"])).unwrap();
        let p = p.prediction().unwrap();
        assert_eq!(p.label, "A");
        assert!((p.ranking[0].1 - p.ranking[1].1).abs() < 1e-9);
    }

    #[test]
    fn all_oov_is_unclassifiable() {
        let docs = [(bag(&["x"]), "A")];
        let m = NaiveBayesModel::train(docs.iter().map(|(b, l)| (b, *l)), 1.0).unwrap();
        assert_eq!(
            m.classify(&bag(&["q", "r"])).unwrap(),
            Classification::Unclassifiable {
                ignored_features: 2
            }
        );
    }

    #[test]
    fn probabilities_normalize() {
        let docs = [
            (bag(&["a", "a", "b"]), "X"),
            (bag(&["c"]), "Y"),
            (bag(&["a", "c"]), "Y"),
        ];
        let m = NaiveBayesModel::train(docs.iter().map(|(b, l)| (b, *l)), 1.0).unwrap();
        let prior: f64 = m.class_log_prior().iter().map(|p| p.exp()).sum();
        assert!((prior - 1.0).abs() < 1e-9);
        for c in 0..m.classes().len() {
            let total: f64 = ["a", "b", "c"]
                .iter()
                .map(|f| m.feature_log_likelihood(f, c).exp())
                .sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn training_errors() {
        let empty: [(&TokenBag, &str); 0] = [];
        assert!(matches!(
            NaiveBayesModel::train(empty, 1.0),
            Err(NbError::EmptyCorpus)
        ));
        let b = bag(&["a"]);
        assert!(matches!(
            NaiveBayesModel::train([(&b, "A")], 0.0),
            Err(NbError::BadSmoothing(_))
        ));
        let docs: [(&[String], &str); 1] = [(&b.features, "A")];
        assert!(matches!(
            NaiveBayesModel::train_with_classes(CFG, ["A", "B"], docs, 1.0),
            Err(NbError::EmptyClass(c)) if c == "B"
        ));
        let other = TokenBag::new(TokenConfig::first_level_default(), vec!["abcd".into()]);
        assert!(matches!(
            NaiveBayesModel::train([(&b, "A"), (&other, "B")], 1.0),
            Err(NbError::ConfigMismatch { .. })
        ));
    }
}
