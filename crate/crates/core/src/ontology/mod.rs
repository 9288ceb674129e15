//! Category ontology: paths, ingestion, the in-memory index, a secondary
//! "official website" provider and on-disk persistence.

mod category;
mod index;
mod ingest;
mod persist;
mod provider;

pub use category::{CategoryError, CategoryPath};
pub use index::{CategoryIndex, IngestReport, OntologyEntry};
pub use ingest::{ingest_dmoz, DmozFormat, IngestOptions, EXCLUDED_TOP_LEVEL, RETAINED_TOP_LEVEL};
pub use persist::{load_index, save_index, ENTRIES_FILE, SURT_FILE};
pub use provider::{
    lookup_requested, FixtureOntologyProvider, HitSource, LookupCounters, LookupHit, LookupOutcome,
    NoProvider, OntologyLookup, OntologyProvider, ProviderError, ProviderRecord,
};

#[derive(Debug, thiserror::Error)]
pub enum OntologyError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("input ends mid-record: {detail}")]
    Truncated { detail: String },
    #[error("XML error at byte {position}: {detail}")]
    Xml { position: u64, detail: String },
    #[error("fixture line {line}: {detail}")]
    Fixture { line: usize, detail: String },
    #[error("saved index is corrupt: {0}")]
    Corrupt(String),
}
