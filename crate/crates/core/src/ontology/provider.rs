use std::collections::HashMap;
use std::io::BufRead;
use std::sync::atomic::{AtomicU64, Ordering};

use log::warn;
use serde::{Deserialize, Serialize};

use super::category::CategoryPath;
use super::index::{CategoryIndex, OntologyEntry};
use super::OntologyError;
use crate::uri::{canonicalize_surt, UriError};

/// A page in a secondary ontology that names `official_uri` as its official
/// website, with the categories it belongs to and the official URIs of the
/// other members of those categories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderRecord {
    pub official_uri: String,
    pub categories: Vec<String>,
    #[serde(default)]
    pub members: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
#[error("ontology provider failure: {0}")]
pub struct ProviderError(pub String);

/// Secondary ontology lookup (a Wikipedia-style "official website" index).
pub trait OntologyProvider: Send + Sync {
    fn find_official(&self, uri: &str) -> Result<Option<ProviderRecord>, ProviderError>;
}

/// A provider that never finds anything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoProvider;

impl OntologyProvider for NoProvider {
    fn find_official(&self, _uri: &str) -> Result<Option<ProviderRecord>, ProviderError> {
        Ok(None)
    }
}

/// File-backed provider: one JSON object per line with `official_uri`,
/// `categories` and `members`. Lookups match on SURT.
#[derive(Debug, Default, Clone)]
pub struct FixtureOntologyProvider {
    by_surt: HashMap<String, ProviderRecord>,
}

impl FixtureOntologyProvider {
    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self, OntologyError> {
        let mut by_surt = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rec: ProviderRecord =
                serde_json::from_str(line).map_err(|e| OntologyError::Fixture {
                    line: i + 1,
                    detail: e.to_string(),
                })?;
            let surt =
                canonicalize_surt(&rec.official_uri).map_err(|e| OntologyError::Fixture {
                    line: i + 1,
                    detail: e.to_string(),
                })?;
            by_surt.entry(surt).or_insert(rec);
        }
        Ok(Self { by_surt })
    }

    pub fn len(&self) -> usize {
        self.by_surt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_surt.is_empty()
    }
}

impl OntologyProvider for FixtureOntologyProvider {
    fn find_official(&self, uri: &str) -> Result<Option<ProviderRecord>, ProviderError> {
        let surt = canonicalize_surt(uri).map_err(|e| ProviderError(e.to_string()))?;
        Ok(self.by_surt.get(&surt).cloned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HitSource {
    /// Found in the category index.
    Primary,
    /// Found through the secondary provider.
    Secondary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupHit {
    pub source: HitSource,
    /// One path for primary hits; one single-label path per provider category otherwise.
    pub categories: Vec<CategoryPath>,
    /// Same-category entries, the requested URI excluded.
    pub entries: Vec<OntologyEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LookupOutcome {
    pub hit: Option<LookupHit>,
    /// Set when the secondary provider failed and only the index was consulted.
    pub degraded: bool,
    pub warning: Option<String>,
}

/// Per-source hit counters.
#[derive(Debug, Default)]
pub struct LookupCounters {
    pub primary_hits: AtomicU64,
    pub secondary_hits: AtomicU64,
    pub misses: AtomicU64,
    pub provider_failures: AtomicU64,
}

impl LookupCounters {
    pub fn snapshot(&self) -> [u64; 4] {
        [
            self.primary_hits.load(Ordering::Relaxed),
            self.secondary_hits.load(Ordering::Relaxed),
            self.misses.load(Ordering::Relaxed),
            self.provider_failures.load(Ordering::Relaxed),
        ]
    }

    fn record(&self, outcome: &LookupOutcome) {
        let counter = match outcome.hit.as_ref().map(|h| h.source) {
            Some(HitSource::Primary) => &self.primary_hits,
            Some(HitSource::Secondary) => &self.secondary_hits,
            None => &self.misses,
        };
        counter.fetch_add(1, Ordering::Relaxed);
        if outcome.degraded {
            self.provider_failures.fetch_add(1, Ordering::Relaxed);
        }
    }
}

/// Checks whether `uri` is already categorized, first in the index and then in
/// the secondary provider.
pub fn lookup_requested(
    index: &CategoryIndex,
    secondary: &dyn OntologyProvider,
    uri: &str,
) -> Result<LookupOutcome, UriError> {
    let surt = canonicalize_surt(uri)?;
    if let Some(entry) = index.by_surt(&surt) {
        let entries = index
            .entries_in(&entry.category)
            .filter(|e| e.surt != surt)
            .cloned()
            .collect();
        return Ok(LookupOutcome {
            hit: Some(LookupHit {
                source: HitSource::Primary,
                categories: vec![entry.category.clone()],
                entries,
            }),
            ..LookupOutcome::default()
        });
    }

    let record = match secondary.find_official(uri) {
        Ok(r) => r,
        Err(e) => {
            warn!("secondary ontology lookup failed for {uri}: {e}");
            return Ok(LookupOutcome {
                hit: None,
                degraded: true,
                warning: Some(e.to_string()),
            });
        }
    };
    let Some(record) = record else {
        return Ok(LookupOutcome::default());
    };

    let categories: Vec<CategoryPath> = record
        .categories
        .iter()
        .filter_map(|c| CategoryPath::new([c.replace('/', "_")]).ok())
        .collect();
    let Some(first) = categories.first().cloned() else {
        return Ok(LookupOutcome::default());
    };
    let mut seen = std::collections::HashSet::new();
    seen.insert(surt.clone());
    let entries = record
        .members
        .iter()
        .filter_map(|m| OntologyEntry::new(first.clone(), m, None, None).ok())
        .filter(|e| seen.insert(e.surt.clone()))
        .collect();
    Ok(LookupOutcome {
        hit: Some(LookupHit {
            source: HitSource::Secondary,
            categories,
            entries,
        }),
        ..LookupOutcome::default()
    })
}

/// An index plus a secondary provider, counting hits per source.
pub struct OntologyLookup<'a> {
    pub index: &'a CategoryIndex,
    pub provider: &'a dyn OntologyProvider,
    pub counters: LookupCounters,
}

impl<'a> OntologyLookup<'a> {
    pub fn new(index: &'a CategoryIndex, provider: &'a dyn OntologyProvider) -> Self {
        Self {
            index,
            provider,
            counters: LookupCounters::default(),
        }
    }

    pub fn lookup(&self, uri: &str) -> Result<LookupOutcome, UriError> {
        let outcome = lookup_requested(self.index, self.provider, uri)?;
        self.counters.record(&outcome);
        Ok(outcome)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{ingest_dmoz, DmozFormat, IngestOptions};

    const VA: &str =
        "Computers/Computer_Science/Academic_Departments/North_America/United_States/Virginia";

    fn index() -> CategoryIndex {
        let text = format!(
            "{VA}\thttp://cs.odu.edu/\tOld Dominion University\tNorfolk Virginia\n\
             {VA}\thttp://cs.gmu.edu/\tGeorge Mason\t\n\
             {VA}\thttp://cs.vt.edu/\tVirginia Tech\t\n\
             Arts/Music\thttp://music.com/\t\t\n"
        );
        ingest_dmoz(text.as_bytes(), DmozFormat::Tsv, &IngestOptions::default()).unwrap()
    }

    fn wiki() -> FixtureOntologyProvider {
        let text = r#"{"official_uri": "http://www.odu.edu/", "categories": ["Old Dominion University", "Universities and colleges in Virginia"], "members": ["http://www.vt.edu/", "http://www.gmu.edu/", "http://odu.edu/"]}"#;
        FixtureOntologyProvider::from_jsonl(text.as_bytes()).unwrap()
    }

    struct Failing;
    impl OntologyProvider for Failing {
        fn find_official(&self, _uri: &str) -> Result<Option<ProviderRecord>, ProviderError> {
            Err(ProviderError("timeout".into()))
        }
    }

    #[test]
    fn primary_hit_returns_siblings() {
        let idx = index();
        let out = lookup_requested(&idx, &NoProvider, "http://cs.odu.edu/").unwrap();
        let hit = out.hit.unwrap();
        assert_eq!(hit.source, HitSource::Primary);
        assert_eq!(hit.categories[0].to_string(), VA);
        let uris: Vec<&str> = hit.entries.iter().map(|e| e.uri.as_str()).collect();
        assert_eq!(uris, vec!["http://cs.gmu.edu/", "http://cs.vt.edu/"]);
    }

    #[test]
    fn secondary_hit_from_fixture() {
        let idx = index();
        let out = lookup_requested(&idx, &wiki(), "http://odu.edu").unwrap();
        let hit = out.hit.unwrap();
        assert_eq!(hit.source, HitSource::Secondary);
        let cats: Vec<String> = hit.categories.iter().map(|c| c.to_string()).collect();
        assert!(cats.contains(&"Old Dominion University".to_string()));
        assert!(cats.contains(&"Universities and colleges in Virginia".to_string()));
        assert_eq!(
            hit.entries.len(),
            2,
            "the requested URI is not its own candidate"
        );
    }

    #[test]
    fn unknown_uri_is_absent() {
        let idx = index();
        let empty = FixtureOntologyProvider::from_jsonl("".as_bytes()).unwrap();
        let out = lookup_requested(&idx, &empty, "http://unknown.org/").unwrap();
        assert!(out.hit.is_none());
        assert!(!out.degraded);
    }

    #[test]
    fn provider_failure_degrades() {
        let idx = index();
        let out = lookup_requested(&idx, &Failing, "http://unknown.org/").unwrap();
        assert!(out.hit.is_none());
        assert!(out.degraded);
        // the primary index still answers
        let out = lookup_requested(&idx, &Failing, "http://cs.vt.edu/").unwrap();
        assert!(out.hit.is_some());
    }

    #[test]
    fn counters_track_sources() {
        let idx = index();
        let w = wiki();
        let lookup = OntologyLookup::new(&idx, &w);
        lookup.lookup("http://cs.odu.edu/").unwrap();
        lookup.lookup("http://odu.edu/").unwrap();
        lookup.lookup("http://nothing.net/").unwrap();
        assert_eq!(lookup.counters.snapshot(), [1, 1, 1, 0]);
    }
}
