use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::providers::{
    fetch_damage, DamageEvidence, DamageProvider, PopularityEvidence, PopularityProvider,
    TimeMapProvider, DEFAULT_ARCHIVE_CEILING, DEFAULT_RANK_FLOOR,
};
use super::timemap::{nearest_memento, parse_timemap, ArchiveEvidence, Memento};
use super::{ArchiveError, EvidenceCache};
use crate::uri::{canonicalize_surt, ParsedUri};

/// Knobs for evidence collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatewayConfig {
    /// TimeMap pages read per URI before marking it truncated.
    pub max_pages: usize,
    /// Concurrent candidate fetches.
    pub parallelism: usize,
    /// Budget for fetching all evidence of one request.
    pub request_budget: Duration,
    /// Extra attempts after a retryable failure.
    pub retries: usize,
    pub rank_floor: u64,
    pub archive_count_ceiling: u64,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            max_pages: 5,
            parallelism: 8,
            request_budget: Duration::from_secs(120),
            retries: 1,
            rank_floor: DEFAULT_RANK_FLOOR,
            archive_count_ceiling: DEFAULT_ARCHIVE_CEILING,
        }
    }
}

/// A candidate URI with all evidence needed to rank it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePage {
    pub uri: String,
    pub surt: String,
    pub archive: ArchiveEvidence,
    /// Memento nearest the request datetime.
    pub memento: Memento,
    pub popularity: PopularityEvidence,
    pub damage: DamageEvidence,
}

/// Evidence collection over the configured providers, with optional caching.
pub struct ArchiveGateway {
    pub timemaps: Arc<dyn TimeMapProvider>,
    pub popularity: Arc<dyn PopularityProvider>,
    pub damage: Arc<dyn DamageProvider>,
    pub cache: Option<Arc<EvidenceCache>>,
    pub config: GatewayConfig,
    /// Clock for cache freshness (Unix seconds); fixed in tests for reproducibility.
    pub now: i64,
}

fn with_retries<T>(
    retries: usize,
    mut f: impl FnMut() -> Result<T, ArchiveError>,
) -> Result<T, ArchiveError> {
    let mut attempt = 0;
    loop {
        match f() {
            Err(e) if e.is_retryable() && attempt < retries => {
                attempt += 1;
                debug!("retrying after {e} (attempt {attempt})");
            }
            other => return other,
        }
    }
}

fn check_deadline(deadline: Option<Instant>) -> Result<(), ArchiveError> {
    match deadline {
        Some(d) if Instant::now() > d => {
            Err(ArchiveError::Timeout("request budget exhausted".into()))
        }
        _ => Ok(()),
    }
}

impl ArchiveGateway {
    pub fn new(
        timemaps: Arc<dyn TimeMapProvider>,
        popularity: Arc<dyn PopularityProvider>,
        damage: Arc<dyn DamageProvider>,
        config: GatewayConfig,
    ) -> Self {
        Self {
            timemaps,
            popularity,
            damage,
            cache: None,
            config,
            now: Utc::now().timestamp(),
        }
    }

    pub fn with_cache(mut self, cache: Arc<EvidenceCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    /// Follows `rel="next"` links up to the page limit. A missing TimeMap means
    /// "not archived", not an error.
    pub fn fetch_timemap(&self, uri: &str) -> Result<ArchiveEvidence, ArchiveError> {
        self.fetch_timemap_until(uri, None)
    }

    fn fetch_timemap_until(
        &self,
        uri: &str,
        deadline: Option<Instant>,
    ) -> Result<ArchiveEvidence, ArchiveError> {
        let surt = canonicalize_surt(uri).map_err(|e| ArchiveError::Malformed(e.to_string()))?;
        let ns = self.timemaps.name().to_string();
        if let Some(hit) = self
            .cache
            .as_ref()
            .and_then(|c| c.get::<ArchiveEvidence>(&ns, &surt, self.now))
        {
            return Ok(hit);
        }
        check_deadline(deadline)?;
        let first = with_retries(self.config.retries, || self.timemaps.first_page(uri))?;
        let evidence = match first {
            None => ArchiveEvidence::not_archived(uri),
            Some(text) => {
                let mut page = parse_timemap(&text)?;
                let mut mementos = std::mem::take(&mut page.mementos);
                let mut pages = 1;
                let mut truncated = false;
                while let Some(next) = page.next_page.take() {
                    if pages >= self.config.max_pages {
                        truncated = true;
                        warn!("{uri}: TimeMap has more than {pages} pages; truncated");
                        break;
                    }
                    check_deadline(deadline)?;
                    match with_retries(self.config.retries, || self.timemaps.page(&next))? {
                        Some(text) => {
                            page = parse_timemap(&text)?;
                            mementos.append(&mut page.mementos);
                            pages += 1;
                        }
                        None => break,
                    }
                }
                ArchiveEvidence::from_mementos(uri, mementos, pages, truncated)
            }
        };
        if let Some(c) = &self.cache {
            c.put(&ns, &surt, self.now, &evidence)?;
        }
        Ok(evidence)
    }

    pub fn fetch_popularity(
        &self,
        uri: &str,
        evidence: &ArchiveEvidence,
    ) -> Result<PopularityEvidence, ArchiveError> {
        let parsed = ParsedUri::parse(uri).map_err(|e| ArchiveError::Malformed(e.to_string()))?;
        let rank = with_retries(self.config.retries, || self.popularity.global_rank(&parsed))?;
        Ok(PopularityEvidence::new(
            rank,
            evidence.memento_count as u64,
            self.config.rank_floor,
            self.config.archive_count_ceiling,
        ))
    }

    pub fn fetch_damage(&self, memento_uri: &str) -> Result<DamageEvidence, ArchiveError> {
        let ns = self.damage.name().to_string();
        if let Some(hit) = self
            .cache
            .as_ref()
            .and_then(|c| c.get::<DamageEvidence>(&ns, memento_uri, self.now))
        {
            return Ok(hit);
        }
        let d = with_retries(self.config.retries, || {
            fetch_damage(self.damage.as_ref(), memento_uri)
        })?;
        if let Some(c) = &self.cache {
            c.put(&ns, memento_uri, self.now, &d)?;
        }
        Ok(d)
    }

    /// All evidence for one candidate; `Ok(None)` when it is not archived.
    pub fn gather(
        &self,
        uri: &str,
        requested: DateTime<Utc>,
    ) -> Result<Option<CandidatePage>, ArchiveError> {
        self.gather_until(uri, requested, None)
    }

    fn gather_until(
        &self,
        uri: &str,
        requested: DateTime<Utc>,
        deadline: Option<Instant>,
    ) -> Result<Option<CandidatePage>, ArchiveError> {
        let mut archive = self.fetch_timemap_until(uri, deadline)?;
        if !archive.archived {
            return Ok(None);
        }
        let memento = nearest_memento(&archive, requested)?.clone();
        archive.nearest_memento_uri = Some(memento.uri.clone());
        check_deadline(deadline)?;
        let popularity = self.fetch_popularity(uri, &archive)?;
        check_deadline(deadline)?;
        let damage = self.fetch_damage(&memento.uri)?;
        Ok(Some(CandidatePage {
            uri: uri.to_string(),
            surt: canonicalize_surt(uri).map_err(|e| ArchiveError::Malformed(e.to_string()))?,
            archive,
            memento,
            popularity,
            damage,
        }))
    }

    /// Gathers evidence for many candidates on a bounded pool. Results come back
    /// in input order.
    pub fn gather_all(
        &self,
        uris: &[String],
        requested: DateTime<Utc>,
    ) -> Vec<Result<Option<CandidatePage>, ArchiveError>> {
        let deadline = Instant::now().checked_add(self.config.request_budget);
        let run = || {
            uris.par_iter()
                .map(|u| self.gather_until(u, requested, deadline))
                .collect::<Vec<_>>()
        };
        match rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.parallelism.max(1))
            .build()
        {
            Ok(pool) => pool.install(run),
            Err(e) => {
                warn!("could not build fetch pool ({e}); fetching on the global pool");
                run()
            }
        }
    }
}
