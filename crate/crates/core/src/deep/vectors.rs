use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DeepError, DeepFeaturizer, GramScheme};
use crate::ontology::{CategoryIndex, CategoryPath};
use crate::uri::TokenBag;

/// Sparse term-frequency vector over interned feature ids.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    /// Ascending feature ids.
    ids: Vec<u32>,
    weights: Vec<f64>,
    norm: f64,
}

impl SparseVector {
    fn from_counts(counts: BTreeMap<u32, f64>) -> Self {
        let norm = counts.values().map(|w| w * w).sum::<f64>().sqrt();
        let (ids, weights) = counts.into_iter().unzip();
        Self { ids, weights, norm }
    }

    pub fn nnz(&self) -> usize {
        self.ids.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Cosine similarity; 0 when either vector is zero.
    pub fn cosine(&self, other: &SparseVector) -> f64 {
        if self.norm == 0.0 || other.norm == 0.0 {
            return 0.0;
        }
        let (mut i, mut j, mut dot) = (0, 0, 0.0);
        while i < self.ids.len() && j < other.ids.len() {
            match self.ids[i].cmp(&other.ids[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += self.weights[i] * other.weights[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        (dot / (self.norm * other.norm)).clamp(0.0, 1.0)
    }
}

/// A category whose mean similarity to a query is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateCategory {
    pub path: CategoryPath,
    /// Mean cosine similarity over the category's entries, in `[0, 1]`.
    pub score: f64,
}

#[derive(Debug, Clone)]
struct CategoryVectors {
    path: CategoryPath,
    vectors: Vec<SparseVector>,
}

/// TF vectors for every entry, grouped by full category path.
#[derive(Debug, Clone)]
pub struct CategoryVectorIndex {
    scheme: GramScheme,
    interner: HashMap<String, u32>,
    /// Sorted by path.
    categories: Vec<CategoryVectors>,
    excluded: usize,
}

impl CategoryVectorIndex {
    /// Featurizes every entry (URI tokens plus title and description) with the
    /// featurizer's gram scheme. Entries without features are excluded and counted.
    pub fn build(index: &CategoryIndex, featurizer: &DeepFeaturizer) -> Result<Self, DeepError> {
        if index.is_empty() {
            return Err(DeepError::EmptyIndex);
        }
        let paths: Vec<&CategoryPath> = index.categories().collect();
        let featurized: Vec<(CategoryPath, Vec<Vec<String>>)> = paths
            .par_iter()
            .map(|path| {
                let docs = index
                    .entries_in(path)
                    .map(|e| featurizer.entry_features(e))
                    .collect();
                ((*path).clone(), docs)
            })
            .collect();
        let mut out = Self {
            scheme: featurizer.scheme(),
            interner: HashMap::new(),
            categories: Vec::with_capacity(featurized.len()),
            excluded: 0,
        };
        for (path, docs) in featurized {
            let mut vectors = Vec::with_capacity(docs.len());
            for features in docs {
                if features.is_empty() {
                    out.excluded += 1;
                    continue;
                }
                vectors.push(out.intern_vector(&features));
            }
            out.categories.push(CategoryVectors { path, vectors });
        }
        Ok(out)
    }

    fn intern_vector(&mut self, features: &[String]) -> SparseVector {
        let mut counts = BTreeMap::new();
        for f in features {
            let next = self.interner.len() as u32;
            let id = *self.interner.entry(f.clone()).or_insert(next);
            *counts.entry(id).or_insert(0.0) += 1.0;
        }
        SparseVector::from_counts(counts)
    }

    /// Query vector; features outside the index still count towards its norm.
    pub fn query_vector(&self, features: &[String]) -> SparseVector {
        let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
        let mut unseen: HashMap<&str, f64> = HashMap::new();
        for f in features {
            match self.interner.get(f) {
                Some(&id) => *counts.entry(id).or_insert(0.0) += 1.0,
                None => *unseen.entry(f).or_insert(0.0) += 1.0,
            }
        }
        let mut v = SparseVector::from_counts(counts);
        let extra: f64 = unseen.values().map(|w| w * w).sum();
        v.norm = (v.norm * v.norm + extra).sqrt();
        v
    }

    pub fn scheme(&self) -> GramScheme {
        self.scheme
    }

    /// Entries left out for lack of features.
    pub fn excluded(&self) -> usize {
        self.excluded
    }

    pub fn category_count(&self) -> usize {
        self.categories.len()
    }

    pub fn paths(&self) -> impl Iterator<Item = &CategoryPath> {
        self.categories.iter().map(|c| &c.path)
    }

    pub fn vectors_in(&self, path: &CategoryPath) -> Option<&[SparseVector]> {
        self.categories
            .binary_search_by(|c| c.path.cmp(path))
            .ok()
            .map(|i| self.categories[i].vectors.as_slice())
    }

    /// Mean cosine of `query` against each category, best `n` with a positive
    /// score. Ties go to the lexicographically smaller path. With `within_top`,
    /// only categories under that top-level label are scored.
    pub fn top_candidates(
        &self,
        query: &TokenBag,
        n: usize,
        within_top: Option<&str>,
    ) -> Vec<CandidateCategory> {
        let q = self.query_vector(&query.features);
        if q.norm == 0.0 || n == 0 {
            return Vec::new();
        }
        let mut scored: Vec<CandidateCategory> = self
            .categories
            .par_iter()
            .filter(|c| within_top.is_none_or(|t| c.path.top() == t))
            .filter(|c| !c.vectors.is_empty())
            .map(|c| {
                let total: f64 = c.vectors.iter().map(|v| v.cosine(&q)).sum();
                CandidateCategory {
                    path: c.path.clone(),
                    score: (total / c.vectors.len() as f64).clamp(0.0, 1.0),
                }
            })
            .filter(|c| c.score > 0.0)
            .collect();
        scored.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| a.path.cmp(&b.path))
        });
        scored.truncate(n);
        scored
    }

    /// Text dump: `category <path>` then one line per entry of
    /// space-separated `feature:tf` pairs, features sorted.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut names = vec![""; self.interner.len()];
        for (f, &id) in &self.interner {
            names[id as usize] = f;
        }
        writeln!(out, "lostpage-vectors 1 {}", self.scheme)?;
        for c in &self.categories {
            writeln!(out, "category {}", c.path)?;
            for v in &c.vectors {
                let mut pairs: Vec<(&str, f64)> = v
                    .ids
                    .iter()
                    .zip(&v.weights)
                    .map(|(&id, &w)| (names[id as usize], w))
                    .collect();
                pairs.sort_by(|a, b| a.0.cmp(b.0));
                let line: Vec<String> = pairs.iter().map(|(f, w)| format!("{f}:{w}")).collect();
                writeln!(out, "{}", line.join(" "))?;
            }
        }
        out.flush()
    }

    /// Reads a dump written by [`write_dump`](Self::write_dump).
    pub fn read_dump<R: BufRead>(input: R) -> Result<Self, DeepError> {
        let bad = |line: usize, detail: &str| DeepError::Dump {
            line,
            detail: detail.to_string(),
        };
        let mut lines = input.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty dump"))?;
        let header = header?;
        let scheme: GramScheme = header
            .strip_prefix("lostpage-vectors 1 ")
            .ok_or_else(|| bad(1, "bad header"))?
            .parse()
            .map_err(|_| bad(1, "bad gram scheme"))?;
        let mut out = Self {
            scheme,
            interner: HashMap::new(),
            categories: Vec::new(),
            excluded: 0,
        };
        for (i, line) in lines {
            let line = line?;
            if let Some(path) = line.strip_prefix("category ") {
                let path = CategoryPath::parse(path).map_err(|e| bad(i + 1, &e.to_string()))?;
                out.categories.push(CategoryVectors {
                    path,
                    vectors: Vec::new(),
                });
                continue;
            }
            let mut counts = BTreeMap::new();
            for pair in line.split(' ').filter(|p| !p.is_empty()) {
                let (f, w) = pair
                    .rsplit_once(':')
                    .ok_or_else(|| bad(i + 1, "expected feature:tf"))?;
                let w: f64 = w.parse().map_err(|_| bad(i + 1, "bad tf"))?;
                let next = out.interner.len() as u32;
                let id = *out.interner.entry(f.to_string()).or_insert(next);
                counts.insert(id, w);
            }
            let vector = SparseVector::from_counts(counts);
            out.categories
                .last_mut()
                .ok_or_else(|| bad(i + 1, "vector before any category"))?
                .vectors
                .push(vector);
        }
        if out.categories.windows(2).any(|w| w[0].path >= w[1].path) {
            return Err(bad(0, "categories must be sorted and unique"));
        }
        Ok(out)
    }
}
