use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::deep::{
    level_accuracy, CategoryVectorIndex, DeepClassifier, DeepFeaturizer, DEFAULT_CANDIDATES,
};
use crate::ontology::{CategoryIndex, CategoryPath, OntologyEntry};
use crate::report::{dictionary_words, UriReport};
use crate::uri::{detect_patterns_parsed, ParsedUri, WordLexicon};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeepEvalOptions {
    /// Share of each category's entries held out for testing.
    pub holdout_fraction: f64,
    pub seed: u64,
    pub candidates: usize,
}

impl Default for DeepEvalOptions {
    fn default() -> Self {
        Self {
            holdout_fraction: 0.1,
            seed: 0,
            candidates: DEFAULT_CANDIDATES,
        }
    }
}

/// Per-level accuracy for one slice of the test items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub group: String,
    pub items: usize,
    pub levels: Vec<f64>,
}

/// One held-out item and what the deep stage made of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepEvalItem {
    pub uri: String,
    pub truth: CategoryPath,
    pub predicted: CategoryPath,
    /// Set when deep classification failed and only the given top label stands.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepEvalReport {
    pub items: Vec<DeepEvalItem>,
    /// Categories with too few entries to hold any out.
    pub skipped_categories: Vec<CategoryPath>,
    pub failures: usize,
    /// Micro-F1 per level, starting at level 1. On single-label data this is accuracy.
    pub levels: Vec<f64>,
    pub by_depth: Vec<LevelRow>,
    pub by_dictionary: Vec<LevelRow>,
    pub by_long_strings: Vec<LevelRow>,
    pub by_top_level: Vec<LevelRow>,
}

/// Splits `index` per category, classifies each held-out entry with its true
/// top-level label given, and reports accuracy per level with breakdowns.
pub fn evaluate_deep(
    index: &CategoryIndex,
    featurizer: &DeepFeaturizer,
    lexicon: &WordLexicon,
    options: &DeepEvalOptions,
) -> Result<DeepEvalReport, PipelineError> {
    if !(options.holdout_fraction > 0.0 && options.holdout_fraction < 1.0) {
        return Err(PipelineError::Config(format!(
            "holdout fraction must be in (0, 1), got {}",
            options.holdout_fraction
        )));
    }
    let (train, test, skipped) = split_holdout(index, options.holdout_fraction, options.seed);
    if test.is_empty() {
        return Err(PipelineError::Config(
            "no category has enough entries to hold one out".into(),
        ));
    }
    let train = CategoryIndex::from_entries(train);
    let vectors = CategoryVectorIndex::build(&train, featurizer)?;
    let deep = DeepClassifier {
        index: &train,
        vectors: &vectors,
        featurizer,
        candidates: options.candidates,
    };

    let items: Vec<DeepEvalItem> = test
        .par_iter()
        .map(|e| {
            let (predicted, failure) = match deep.classify(&e.uri, Some(e.category.top())) {
                Ok(t) => (t.outcome.path, None),
                Err(err) => (
                    e.category.prefix(1).unwrap_or_else(|| e.category.clone()),
                    Some(err.to_string()),
                ),
            };
            DeepEvalItem {
                uri: e.uri.clone(),
                truth: e.category.clone(),
                predicted,
                failure,
            }
        })
        .collect();

    let max_level = items.iter().map(|i| i.truth.len()).max().unwrap_or(1);
    let levels = level_accuracy(items.iter().map(|i| (&i.truth, &i.predicted)), max_level);

    let mut depth: BTreeMap<String, Vec<&DeepEvalItem>> = BTreeMap::new();
    let mut dictionary: BTreeMap<String, Vec<&DeepEvalItem>> = BTreeMap::new();
    let mut long: BTreeMap<String, Vec<&DeepEvalItem>> = BTreeMap::new();
    let mut top: BTreeMap<String, Vec<&DeepEvalItem>> = BTreeMap::new();
    for item in &items {
        top.entry(item.truth.top().to_string())
            .or_default()
            .push(item);
        let Ok(parsed) = ParsedUri::parse(&item.uri) else {
            continue;
        };
        depth
            .entry(depth_bucket(crate::uri::depth_of(&parsed)))
            .or_default()
            .push(item);
        let words = dictionary_words(&parsed, lexicon);
        let dict = if words.only_dictionary {
            "only dictionary words"
        } else if words.any_dictionary {
            "some dictionary words"
        } else {
            "no dictionary words"
        };
        dictionary.entry(dict.to_string()).or_default().push(item);
        let patterns = detect_patterns_parsed(&item.uri, &parsed);
        let strings = patterns.hostname.long_strings || patterns.path.long_strings;
        let slugs = patterns.hostname.long_slugs || patterns.path.long_slugs;
        if strings {
            long.entry("long strings".into()).or_default().push(item);
        }
        if slugs {
            long.entry("long slugs".into()).or_default().push(item);
        }
        if !strings && !slugs {
            long.entry("neither".into()).or_default().push(item);
        }
    }
    let rows = |groups: BTreeMap<String, Vec<&DeepEvalItem>>| -> Vec<LevelRow> {
        groups
            .into_iter()
            .map(|(group, members)| LevelRow {
                items: members.len(),
                levels: level_accuracy(members.iter().map(|i| (&i.truth, &i.predicted)), max_level),
                group,
            })
            .collect()
    };

    Ok(DeepEvalReport {
        failures: items.iter().filter(|i| i.failure.is_some()).count(),
        skipped_categories: skipped,
        levels,
        by_depth: rows(depth),
        by_dictionary: rows(dictionary),
        by_long_strings: rows(long),
        by_top_level: rows(top),
        items,
    })
}

fn depth_bucket(depth: usize) -> String {
    if depth >= 5 {
        "5+".into()
    } else {
        depth.to_string()
    }
}

/// Holds out `fraction` of every category's entries (at least one, always
/// leaving one for training). Categories with fewer than two entries are
/// returned as skipped and kept entirely for training.
pub fn split_holdout(
    index: &CategoryIndex,
    fraction: f64,
    seed: u64,
) -> (Vec<OntologyEntry>, Vec<OntologyEntry>, Vec<CategoryPath>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut skipped = Vec::new();
    let mut categories: Vec<&CategoryPath> = index.categories().collect();
    categories.sort();
    for cat in categories {
        let mut members: Vec<&OntologyEntry> = index.entries_in(cat).collect();
        if members.len() < 2 {
            skipped.push(cat.clone());
            train.extend(members.into_iter().cloned());
            continue;
        }
        members.shuffle(&mut rng);
        let k = ((members.len() as f64 * fraction).round() as usize).clamp(1, members.len() - 1);
        test.extend(members[..k].iter().map(|e| (*e).clone()));
        train.extend(members[k..].iter().map(|e| (*e).clone()));
    }
    (train, test, skipped)
}

/// Request-log analysis uses the corpus report unchanged.
pub fn analyze_requests<I, S>(uris: I, lexicon: &WordLexicon) -> UriReport
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    crate::report::analyze_uris(uris, lexicon)
}

fn write_rows(out: &mut String, title: &str, rows: &[LevelRow], levels: usize) -> fmt::Result {
    write!(out, "\n{title}\titems")?;
    for l in 1..=levels {
        write!(out, "\tlevel {l}")?;
    }
    writeln!(out)?;
    for row in rows {
        write!(out, "{}\t{}", row.group, row.items)?;
        for v in &row.levels {
            write!(out, "\t{v:.4}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

impl fmt::Display for DeepEvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(
            out,
            "held-out items: {} (deep failures: {}, skipped categories: {})",
            self.items.len(),
            self.failures,
            self.skipped_categories.len()
        )?;
        writeln!(out, "\nlevel\tmicro-F1")?;
        for (i, v) in self.levels.iter().enumerate() {
            writeln!(out, "{}\t{v:.4}", i + 1)?;
        }
        let n = self.levels.len();
        write_rows(&mut out, "depth", &self.by_depth, n)?;
        write_rows(&mut out, "dictionary", &self.by_dictionary, n)?;
        write_rows(&mut out, "pattern", &self.by_long_strings, n)?;
        write_rows(&mut out, "top-level", &self.by_top_level, n)?;
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deep::GramScheme;
    use crate::ontology::{ingest_dmoz, DmozFormat, IngestOptions};
    use crate::uri::Tokenizer;

    fn toy() -> CategoryIndex {
        let mut text = String::new();
        let cats = [
            ("Sports/Baseball", ["baseball", "pitcher", "homerun"]),
            ("Sports/Soccer", ["soccer", "goalkeeper", "striker"]),
            ("Arts/Music", ["guitar", "orchestra", "melody"]),
            ("Arts/Painting", ["canvas", "watercolor", "brushes"]),
        ];
        for (cat, words) in cats {
            for i in 0..6 {
                let w = words[i % 3];
                let v = words[(i + 1) % 3];
                text.push_str(&format!(
                    "{cat}\thttp://{w}{v}{}.com/{v}\t\t\n",
                    ["alpha", "bravo", "delta", "gamma", "kilo", "lima"][i]
                ));
            }
        }
        text.push_str("Arts/Lonely\thttp://single.com/\t\t\n");
        ingest_dmoz(text.as_bytes(), DmozFormat::Tsv, &IngestOptions::default()).unwrap()
    }

    #[test]
    fn split_is_deterministic_and_skips_singletons() {
        let idx = toy();
        let (tr1, te1, sk) = split_holdout(&idx, 0.2, 7);
        let (tr2, te2, _) = split_holdout(&idx, 0.2, 7);
        assert_eq!(te1, te2);
        assert_eq!(tr1, tr2);
        assert_eq!(sk.len(), 1);
        assert_eq!(sk[0].to_string(), "Arts/Lonely");
        assert_eq!(te1.len(), 4, "one of six per category");
        assert_eq!(tr1.len() + te1.len(), idx.len());
    }

    #[test]
    fn separable_toy_is_perfect_at_level_two() {
        let idx = toy();
        let f = DeepFeaturizer::new(Tokenizer::default(), GramScheme::AllGram);
        let rep = evaluate_deep(
            &idx,
            &f,
            &WordLexicon::bundled(),
            &DeepEvalOptions {
                holdout_fraction: 0.2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(rep.levels.len(), 2);
        assert_eq!(rep.levels[0], 1.0);
        assert_eq!(rep.levels[1], 1.0);
        assert_eq!(rep.by_top_level.len(), 2);
        let total: usize = rep.by_depth.iter().map(|r| r.items).sum();
        assert_eq!(total, rep.items.len());
        assert!(rep.to_string().contains("level 2"));
    }

    #[test]
    fn bad_fraction_is_rejected() {
        let f = DeepFeaturizer::new(Tokenizer::default(), GramScheme::AllGram);
        let opts = DeepEvalOptions {
            holdout_fraction: 1.0,
            ..Default::default()
        };
        assert!(evaluate_deep(&toy(), &f, &WordLexicon::bundled(), &opts).is_err());
    }
}
