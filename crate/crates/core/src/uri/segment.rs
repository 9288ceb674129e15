use std::collections::HashMap;
use std::sync::Arc;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

static BUNDLED_WORDS: &str = include_str!("../../data/words_en.txt");

static BUNDLED: Lazy<Arc<WordLexicon>> =
    Lazy::new(|| Arc::new(WordLexicon::from_ranked_lines(BUNDLED_WORDS)));

/// Fixed cost added once per unknown span, so adjacent unknown letters stay together.
const UNKNOWN_SPAN_PENALTY: f64 = 1.0;

/// Frequency-ranked word list with Zipf costs: the word at rank `r` (0-based)
/// costs `ln((r + 1) * ln N)`.
#[derive(Debug, Clone)]
pub struct WordLexicon {
    costs: HashMap<String, f64>,
    max_word_len: usize,
    unknown_char_cost: f64,
}

/// One piece of a segmentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub text: String,
    pub in_lexicon: bool,
}

impl WordLexicon {
    /// Words in rank order, most frequent first. Later duplicates are ignored.
    pub fn from_ranked<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut ordered: Vec<String> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for w in words {
            let w = w.as_ref().trim().to_lowercase();
            if !w.is_empty() && seen.insert(w.clone()) {
                ordered.push(w);
            }
        }
        let log_n = (ordered.len().max(3) as f64).ln();
        let mut costs = HashMap::with_capacity(ordered.len());
        let mut max_word_len = 0;
        let mut max_cost: f64 = 0.0;
        for (rank, w) in ordered.into_iter().enumerate() {
            let cost = ((rank as f64 + 1.0) * log_n).ln();
            max_cost = max_cost.max(cost);
            max_word_len = max_word_len.max(w.chars().count());
            costs.insert(w, cost);
        }
        Self {
            costs,
            max_word_len,
            unknown_char_cost: max_cost + 1.0,
        }
    }

    /// One word per line in rank order; `#` comments and blank lines skipped.
    pub fn from_ranked_lines(text: &str) -> Self {
        Self::from_ranked(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    /// The bundled English list.
    pub fn bundled() -> Arc<WordLexicon> {
        BUNDLED.clone()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.costs.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    fn word_cost(&self, w: &str) -> Option<f64> {
        self.costs.get(w).copied()
    }
}

/// Minimum-cost split of `text` into lexicon words. Letters no word covers come
/// back as a single non-lexicon piece per maximal uncovered span.
pub fn segment_words(text: &str, lexicon: &WordLexicon) -> Vec<Segment> {
    if text.is_empty() {
        return Vec::new();
    }
    let bounds: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let n = bounds.len() - 1;

    // best[i]: (cost, start index, is_word) of the cheapest parse of the first i chars
    let mut best: Vec<(f64, usize, bool)> = vec![(f64::INFINITY, 0, false); n + 1];
    best[0].0 = 0.0;
    for end in 1..=n {
        for start in 0..end {
            let base = best[start].0;
            if !base.is_finite() {
                continue;
            }
            let piece = &text[bounds[start]..bounds[end]];
            let len = end - start;
            if len <= lexicon.max_word_len {
                if let Some(c) = lexicon.word_cost(piece) {
                    let total = base + c;
                    if total < best[end].0 {
                        best[end] = (total, start, true);
                    }
                }
            }
            let unknown = base + UNKNOWN_SPAN_PENALTY + len as f64 * lexicon.unknown_char_cost;
            if unknown < best[end].0 {
                best[end] = (unknown, start, false);
            }
        }
    }

    let mut pieces = Vec::new();
    let mut end = n;
    while end > 0 {
        let (_, start, is_word) = best[end];
        pieces.push(Segment {
            text: text[bounds[start]..bounds[end]].to_string(),
            in_lexicon: is_word,
        });
        end = start;
    }
    pieces.reverse();

    let mut merged: Vec<Segment> = Vec::with_capacity(pieces.len());
    for p in pieces {
        match merged.last_mut() {
            Some(last) if !last.in_lexicon && !p.in_lexicon => last.text.push_str(&p.text),
            _ => merged.push(p),
        }
    }
    merged
}
