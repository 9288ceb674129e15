use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{EvalReport, FoldReport};
use super::model::NaiveBayesModel;
use super::NbError;
use crate::uri::{TokenBag, TokenConfig, Tokenizer};

/// What to do with test items containing features the fold's training data lacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OovPolicy {
    /// Remove such items from the test set.
    #[default]
    DropItem,
    /// Keep them and ignore the unseen features when classifying.
    IgnoreFeatures,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub smoothing: f64,
    pub oov: OovPolicy,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: 10,
            seed: 0,
            smoothing: 1.0,
            oov: OovPolicy::DropItem,
        }
    }
}

/// Index sets for k folds over `len` items after a seeded shuffle. Fold sizes
/// differ by at most one.
pub fn fold_assignments(len: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = vec![Vec::new(); folds];
    for (i, idx) in order.into_iter().enumerate() {
        out[i % folds].push(idx);
    }
    for fold in &mut out {
        fold.sort_unstable();
    }
    out
}

/// A `(truth, prediction)` pair; no prediction means unclassifiable.
type Outcome = (String, Option<String>);

/// k-fold cross-validation of the classifier over labelled bags.
pub fn cross_validate(
    corpus: &[(TokenBag, String)],
    options: &CvOptions,
) -> Result<EvalReport, NbError> {
    if options.folds < 2 {
        return Err(NbError::BadFolds {
            folds: options.folds,
            items: corpus.len(),
        });
    }
    if corpus.len() < options.folds {
        return Err(NbError::BadFolds {
            folds: options.folds,
            items: corpus.len(),
        });
    }
    let folds = fold_assignments(corpus.len(), options.folds, options.seed);
    let results: Vec<Result<(FoldReport, Vec<Outcome>), NbError>> = folds
        .par_iter()
        .enumerate()
        .map(|(k, test)| {
            let mut in_test = vec![false; corpus.len()];
            for &i in test {
                in_test[i] = true;
            }
            let train = corpus
                .iter()
                .zip(&in_test)
                .filter(|(_, t)| !**t)
                .map(|((bag, label), _)| (bag, label.as_str()));
            let model = NaiveBayesModel::train(train, options.smoothing)?;
            let mut pairs = Vec::new();
            let mut dropped = 0;
            for &i in test {
                let (bag, truth) = &corpus[i];
                if options.oov == OovPolicy::DropItem
                    && bag.features.iter().any(|f| !model.contains_feature(f))
                {
                    dropped += 1;
                    continue;
                }
                let pred = model.classify(bag)?;
                pairs.push((truth.clone(), pred.label().map(str::to_string)));
            }
            let correct = pairs
                .iter()
                .filter(|(t, p)| p.as_deref() == Some(t.as_str()))
                .count();
            let fold = FoldReport {
                fold: k,
                train_size: corpus.len() - test.len(),
                tested: pairs.len(),
                dropped_oov: dropped,
                skipped: pairs.is_empty(),
                accuracy: if pairs.is_empty() {
                    0.0
                } else {
                    correct as f64 / pairs.len() as f64
                },
            };
            if fold.skipped {
                log::warn!("fold {k}: no test items left after filtering; skipped");
            }
            Ok((fold, pairs))
        })
        .collect();

    let mut fold_reports = Vec::with_capacity(results.len());
    let mut all_pairs = Vec::new();
    for r in results {
        let (fold, pairs) = r?;
        fold_reports.push(fold);
        all_pairs.extend(pairs);
    }
    let mut report = EvalReport::from_pairs(all_pairs);
    report.folds = fold_reports;
    Ok(report)
}

/// Tokenizes `(uri, label)` pairs with `config` and cross-validates. URIs that
/// fail to parse or yield no features are left out.
pub fn cross_validate_uris<'a, I>(
    tokenizer: &Tokenizer,
    corpus: I,
    config: TokenConfig,
    options: &CvOptions,
) -> Result<EvalReport, NbError>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let bags: Vec<(TokenBag, String)> = corpus
        .into_iter()
        .filter_map(|(uri, label)| {
            let bag = tokenizer.tokenize(uri, config).ok()?;
            (!bag.is_empty()).then(|| (bag, label.to_string()))
        })
        .collect();
    cross_validate(&bags, options)
}

/// Size of the largest class divided by the corpus size.
pub fn majority_baseline<'a, I: IntoIterator<Item = &'a str>>(labels: I) -> f64 {
    let mut counts = std::collections::HashMap::new();
    let mut n = 0usize;
    for l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
        n += 1;
    }
    if n == 0 {
        return 0.0;
    }
    *counts.values().max().unwrap_or(&0) as f64 / n as f64
}
