//! Evidence from web archives and companion services: TimeMaps, popularity
//! ranks and damage scores, each behind a provider trait, plus a cache.

mod cache;
mod gateway;
#[cfg(feature = "live")]
mod live;
mod providers;
mod timemap;

use std::path::PathBuf;

pub use cache::EvidenceCache;
pub use gateway::{ArchiveGateway, CandidatePage, GatewayConfig};
#[cfg(feature = "live")]
pub use live::{DamageClient, MemGatorClient};
pub use providers::{
    fetch_damage, DamageEvidence, DamageProvider, DamageSource, FixtureDamage, FixturePopularity,
    FixtureTimeMaps, NoEvidence, PopularityEvidence, PopularityProvider, TimeMapProvider,
    DEFAULT_ARCHIVE_CEILING, DEFAULT_DAMAGE, DEFAULT_RANK_FLOOR,
};
pub use timemap::{
    nearest_memento, parse_http_datetime, parse_timemap, ArchiveEvidence, Memento, TimeMapPage,
};

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("timed out: {0}")]
    Timeout(String),
    #[error("network failure: {0}")]
    Network(String),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("{0} has no mementos")]
    NotArchived(String),
    #[error("fixture {path}: {detail}")]
    Fixture { path: PathBuf, detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ArchiveError {
    /// Failures worth another attempt.
    pub fn is_retryable(&self) -> bool {
        matches!(self, ArchiveError::Timeout(_) | ArchiveError::Network(_))
    }
}
