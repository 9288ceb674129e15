use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Precision, recall and F1 for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Items whose true label is this class.
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Outcome of one cross-validation fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_size: usize,
    /// Test items evaluated.
    pub tested: usize,
    /// Test items dropped because they contained features unseen in training.
    pub dropped_oov: usize,
    /// Set when nothing was left to test.
    pub skipped: bool,
    pub accuracy: f64,
}

/// Classification quality over a set of (truth, prediction) pairs.
///
/// `weighted_f1` is the support-weighted mean of per-class F1. A missing
/// prediction (unclassifiable) counts as a false negative for the true class.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub items: usize,
    pub correct: usize,
    pub unclassified: usize,
    pub accuracy: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub classes: Vec<ClassMetrics>,
    /// `(truth, prediction)` → count; prediction `None` is unclassifiable.
    /// Serialized as a list of `[truth, prediction, count]` triples.
    #[serde(with = "confusion_triples")]
    pub confusion: BTreeMap<(String, Option<String>), usize>,
    pub folds: Vec<FoldReport>,
}

mod confusion_triples {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    type Confusion = BTreeMap<(String, Option<String>), usize>;

    pub fn serialize<S: Serializer>(map: &Confusion, s: S) -> Result<S::Ok, S::Error> {
        let triples: Vec<(&String, &Option<String>, usize)> =
            map.iter().map(|((t, p), n)| (t, p, *n)).collect();
        triples.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Confusion, D::Error> {
        let triples: Vec<(String, Option<String>, usize)> = Vec::deserialize(d)?;
        Ok(triples.into_iter().map(|(t, p, n)| ((t, p), n)).collect())
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl EvalReport {
    /// Builds the report. Classes are the union of true and predicted labels;
    /// zero denominators give 0.
    pub fn from_pairs<I, T, P>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (T, Option<P>)>,
        T: Into<String>,
        P: Into<String>,
    {
        let mut confusion: BTreeMap<(String, Option<String>), usize> = BTreeMap::new();
        for (truth, pred) in pairs {
            *confusion
                .entry((truth.into(), pred.map(Into::into)))
                .or_default() += 1;
        }
        Self::from_confusion(confusion)
    }

    pub fn from_confusion(confusion: BTreeMap<(String, Option<String>), usize>) -> Self {
        let labels: BTreeSet<&String> = confusion
            .keys()
            .flat_map(|(t, p)| std::iter::once(t).chain(p.as_ref()))
            .collect();
        let mut items = 0;
        let mut correct = 0;
        let mut unclassified = 0;
        let mut tp: BTreeMap<&str, usize> = BTreeMap::new();
        let mut fp: BTreeMap<&str, usize> = BTreeMap::new();
        let mut fneg: BTreeMap<&str, usize> = BTreeMap::new();
        for ((truth, pred), &n) in &confusion {
            items += n;
            match pred {
                Some(p) if p == truth => {
                    correct += n;
                    *tp.entry(truth).or_default() += n;
                }
                Some(p) => {
                    *fp.entry(p).or_default() += n;
                    *fneg.entry(truth).or_default() += n;
                }
                None => {
                    unclassified += n;
                    *fneg.entry(truth).or_default() += n;
                }
            }
        }
        let get = |m: &BTreeMap<&str, usize>, k: &str| m.get(k).copied().unwrap_or(0);
        let classes: Vec<ClassMetrics> = labels
            .iter()
            .map(|label| {
                let (t, p, n) = (get(&tp, label), get(&fp, label), get(&fneg, label));
                let precision = ratio(t, t + p);
                let recall = ratio(t, t + n);
                ClassMetrics {
                    label: label.to_string(),
                    true_positives: t,
                    false_positives: p,
                    false_negatives: n,
                    support: t + n,
                    precision,
                    recall,
                    f1: f1(precision, recall),
                }
            })
            .collect();
        let (sum_tp, sum_fp, sum_fn) = classes.iter().fold((0, 0, 0), |acc, c| {
            (
                acc.0 + c.true_positives,
                acc.1 + c.false_positives,
                acc.2 + c.false_negatives,
            )
        });
        let micro_precision = ratio(sum_tp, sum_tp + sum_fp);
        let micro_recall = ratio(sum_tp, sum_tp + sum_fn);
        let macro_f1 = if classes.is_empty() {
            0.0
        } else {
            classes.iter().map(|c| c.f1).sum::<f64>() / classes.len() as f64
        };
        let total_support: usize = classes.iter().map(|c| c.support).sum();
        let weighted_f1 = if total_support == 0 {
            0.0
        } else {
            classes.iter().map(|c| c.f1 * c.support as f64).sum::<f64>() / total_support as f64
        };
        Self {
            items,
            correct,
            unclassified,
            accuracy: ratio(correct, items),
            micro_precision,
            micro_recall,
            micro_f1: f1(micro_precision, micro_recall),
            macro_f1,
            weighted_f1,
            classes,
            confusion,
            folds: Vec::new(),
        }
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "items {}  correct {}  unclassified {}  accuracy {:.4}",
            self.items, self.correct, self.unclassified, self.accuracy
        )?;
        writeln!(
            f,
            "micro-F1 {:.4}  macro-F1 {:.4}  weighted-F1 {:.4}",
            self.micro_f1, self.macro_f1, self.weighted_f1
        )?;
        writeln!(f, "class\tsupport\tprecision\trecall\tF1")?;
        for c in &self.classes {
            writeln!(
                f,
                "{}\t{}\t{:.4}\t{:.4}\t{:.4}",
                c.label, c.support, c.precision, c.recall, c.f1
            )?;
        }
        if !self.folds.is_empty() {
            writeln!(f, "fold\ttrain\ttested\tdropped_oov\taccuracy")?;
            for fold in &self.folds {
                let acc = if fold.skipped {
                    "skipped".to_string()
                } else {
                    format!("{:.4}", fold.accuracy)
                };
                writeln!(
                    f,
                    "{}\t{}\t{}\t{}\t{}",
                    fold.fold, fold.train_size, fold.tested, fold.dropped_oov, acc
                )?;
            }
        }
        Ok(())
    }
}
