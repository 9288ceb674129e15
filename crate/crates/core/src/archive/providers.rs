use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use super::ArchiveError;
use crate::uri::{canonicalize_surt, ParsedUri};

/// Source of link-format TimeMap pages.
pub trait TimeMapProvider: Send + Sync {
    /// Short name used as the cache namespace.
    fn name(&self) -> &str;
    /// First page of the TimeMap for `uri`; `Ok(None)` when the aggregator has
    /// no TimeMap for it (HTTP 404).
    fn first_page(&self, uri: &str) -> Result<Option<String>, ArchiveError>;
    /// A continuation page named by a `rel="next"` link.
    fn page(&self, url: &str) -> Result<Option<String>, ArchiveError>;
}

/// Global popularity rank of a domain (1 = most popular).
pub trait PopularityProvider: Send + Sync {
    fn name(&self) -> &str;
    fn global_rank(&self, uri: &ParsedUri) -> Result<Option<u64>, ArchiveError>;
}

/// Damage score in `[0, 1]` of a memento.
pub trait DamageProvider: Send + Sync {
    fn name(&self) -> &str;
    fn damage(&self, memento_uri: &str) -> Result<Option<f64>, ArchiveError>;
}

fn read_table(path: &Path) -> Result<Vec<(usize, String, String)>, ArchiveError> {
    let text = fs::read_to_string(path).map_err(|e| ArchiveError::Fixture {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    parse_table(&text, path)
}

fn parse_table(text: &str, path: &Path) -> Result<Vec<(usize, String, String)>, ArchiveError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('\t').ok_or_else(|| ArchiveError::Fixture {
            path: path.to_path_buf(),
            detail: format!("line {}: expected two tab-separated fields", i + 1),
        })?;
        rows.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(rows)
}

/// Recorded TimeMaps on disk. `index.tsv` maps a key to a file in the same
/// directory; a key is either a URI (matched by SURT, giving the first page)
/// or the exact URL of a continuation page. A URI without an entry has no
/// TimeMap.
#[derive(Debug, Clone, Default)]
pub struct FixtureTimeMaps {
    dir: PathBuf,
    by_surt: HashMap<String, String>,
    by_url: HashMap<String, String>,
}

impl FixtureTimeMaps {
    pub fn load(dir: &Path) -> Result<Self, ArchiveError> {
        let mut out = Self {
            dir: dir.to_path_buf(),
            ..Self::default()
        };
        for (_, key, file) in read_table(&dir.join("index.tsv"))? {
            out.by_url.insert(key.clone(), file.clone());
            if let Ok(surt) = canonicalize_surt(&key) {
                out.by_surt.entry(surt).or_insert(file);
            }
        }
        Ok(out)
    }

    fn read(&self, file: &str) -> Result<Option<String>, ArchiveError> {
        let path = self.dir.join(file);
        fs::read_to_string(&path)
            .map(Some)
            .map_err(|e| ArchiveError::Fixture {
                path,
                detail: e.to_string(),
            })
    }
}

impl TimeMapProvider for FixtureTimeMaps {
    fn name(&self) -> &str {
        "fixture-timemap"
    }

    fn first_page(&self, uri: &str) -> Result<Option<String>, ArchiveError> {
        let surt = canonicalize_surt(uri).map_err(|e| ArchiveError::Malformed(e.to_string()))?;
        match self.by_surt.get(&surt) {
            Some(file) => self.read(file),
            None => Ok(None),
        }
    }

    fn page(&self, url: &str) -> Result<Option<String>, ArchiveError> {
        match self.by_url.get(url) {
            Some(file) => self.read(file),
            None => Ok(None),
        }
    }
}

/// `domain<TAB>rank` table. Lookups try the host (without `www`), then the
/// registered domain.
#[derive(Debug, Clone, Default)]
pub struct FixturePopularity {
    ranks: HashMap<String, u64>,
}

impl FixturePopularity {
    pub fn load(path: &Path) -> Result<Self, ArchiveError> {
        Self::from_rows(read_table(path)?, path)
    }

    pub fn from_text(text: &str) -> Result<Self, ArchiveError> {
        let path = Path::new("<inline>");
        Self::from_rows(parse_table(text, path)?, path)
    }

    fn from_rows(rows: Vec<(usize, String, String)>, path: &Path) -> Result<Self, ArchiveError> {
        let mut ranks = HashMap::new();
        for (line, domain, rank) in rows {
            let rank: u64 =
                rank.parse()
                    .ok()
                    .filter(|&r| r >= 1)
                    .ok_or_else(|| ArchiveError::Fixture {
                        path: path.to_path_buf(),
                        detail: format!("line {line}: rank must be a positive integer"),
                    })?;
            ranks.insert(domain.to_ascii_lowercase(), rank);
        }
        Ok(Self { ranks })
    }
}

impl PopularityProvider for FixturePopularity {
    fn name(&self) -> &str {
        "fixture-popularity"
    }

    fn global_rank(&self, uri: &ParsedUri) -> Result<Option<u64>, ArchiveError> {
        let host = crate::uri::strip_www(&uri.host);
        Ok(self
            .ranks
            .get(host)
            .or_else(|| self.ranks.get(&uri.registered_domain))
            .copied())
    }
}

/// `memento-uri<TAB>damage` table.
#[derive(Debug, Clone, Default)]
pub struct FixtureDamage {
    scores: HashMap<String, f64>,
}

impl FixtureDamage {
    pub fn load(path: &Path) -> Result<Self, ArchiveError> {
        Self::from_rows(read_table(path)?, path)
    }

    pub fn from_text(text: &str) -> Result<Self, ArchiveError> {
        let path = Path::new("<inline>");
        Self::from_rows(parse_table(text, path)?, path)
    }

    fn from_rows(rows: Vec<(usize, String, String)>, path: &Path) -> Result<Self, ArchiveError> {
        let mut scores = HashMap::new();
        for (line, uri, d) in rows {
            let d: f64 = d
                .parse()
                .ok()
                .filter(|d: &f64| (0.0..=1.0).contains(d))
                .ok_or_else(|| ArchiveError::Fixture {
                    path: path.to_path_buf(),
                    detail: format!("line {line}: damage must be a number in [0, 1]"),
                })?;
            scores.insert(uri, d);
        }
        Ok(Self { scores })
    }
}

impl DamageProvider for FixtureDamage {
    fn name(&self) -> &str {
        "fixture-damage"
    }

    fn damage(&self, memento_uri: &str) -> Result<Option<f64>, ArchiveError> {
        Ok(self.scores.get(memento_uri).copied())
    }
}

/// Knows nothing; every lookup misses.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoEvidence;

impl TimeMapProvider for NoEvidence {
    fn name(&self) -> &str {
        "none"
    }
    fn first_page(&self, _uri: &str) -> Result<Option<String>, ArchiveError> {
        Ok(None)
    }
    fn page(&self, _url: &str) -> Result<Option<String>, ArchiveError> {
        Ok(None)
    }
}

impl PopularityProvider for NoEvidence {
    fn name(&self) -> &str {
        "none"
    }
    fn global_rank(&self, _uri: &ParsedUri) -> Result<Option<u64>, ArchiveError> {
        Ok(None)
    }
}

impl DamageProvider for NoEvidence {
    fn name(&self) -> &str {
        "none"
    }
    fn damage(&self, _memento_uri: &str) -> Result<Option<f64>, ArchiveError> {
        Ok(None)
    }
}

/// Popularity inputs for one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopularityEvidence {
    /// Global rank `a`, when known; within `1..=rank_floor`.
    pub global_rank: Option<u64>,
    /// Rank of the least popular ranked domain, `x`.
    pub rank_floor: u64,
    /// Times the URI was archived, `n`; never above the ceiling.
    pub archive_count: u64,
    /// Times the most popular site was archived, `m`.
    pub archive_count_ceiling: u64,
    /// The raw archive count exceeded the ceiling and was clamped.
    pub clamped: bool,
}

/// Lowest rank in the ranking service.
pub const DEFAULT_RANK_FLOOR: u64 = 30_000_000;
/// Capture count of the top-ranked site.
pub const DEFAULT_ARCHIVE_CEILING: u64 = 538_300;

impl PopularityEvidence {
    /// Clamps the rank into `1..=rank_floor` and the count to the ceiling.
    pub fn new(
        global_rank: Option<u64>,
        archive_count: u64,
        rank_floor: u64,
        ceiling: u64,
    ) -> Self {
        let clamped = archive_count > ceiling;
        if clamped {
            warn!("archive count {archive_count} above ceiling {ceiling}; clamped");
        }
        Self {
            global_rank: global_rank.map(|a| a.clamp(1, rank_floor.max(1))),
            rank_floor,
            archive_count: archive_count.min(ceiling),
            archive_count_ceiling: ceiling,
            clamped,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DamageSource {
    Provider,
    Fixture,
    /// No score was available; the neutral default was used.
    DefaultMissing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DamageEvidence {
    pub damage: f64,
    pub source: DamageSource,
}

/// Damage assumed for mementos without a score.
pub const DEFAULT_DAMAGE: f64 = 0.5;

impl DamageEvidence {
    pub fn missing() -> Self {
        Self {
            damage: DEFAULT_DAMAGE,
            source: DamageSource::DefaultMissing,
        }
    }
}

/// Looks up the damage of `memento_uri`, defaulting when the provider has none.
pub fn fetch_damage(
    provider: &dyn DamageProvider,
    memento_uri: &str,
) -> Result<DamageEvidence, ArchiveError> {
    let source = if provider.name().starts_with("fixture") {
        DamageSource::Fixture
    } else {
        DamageSource::Provider
    };
    Ok(match provider.damage(memento_uri)? {
        Some(d) => DamageEvidence {
            damage: d.clamp(0.0, 1.0),
            source,
        },
        None => DamageEvidence::missing(),
    })
}
