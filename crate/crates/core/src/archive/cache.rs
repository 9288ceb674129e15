use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use log::warn;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::ArchiveError;

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    provider: String,
    key: String,
    /// Unix seconds.
    fetched_at: i64,
    value: serde_json::Value,
}

/// Append-only JSON-lines cache keyed by `(provider, SURT)`. The last record
/// for a key wins; records older than `max_age_secs` are treated as absent.
#[derive(Debug)]
pub struct EvidenceCache {
    path: PathBuf,
    max_age_secs: i64,
    entries: RwLock<HashMap<(String, String), (i64, serde_json::Value)>>,
    writer: Mutex<File>,
}

impl EvidenceCache {
    /// Opens (creating if needed) the cache file and loads it. Lines that do
    /// not parse, such as a torn final write, are skipped.
    pub fn open(path: &Path, max_age_secs: i64) -> Result<Self, ArchiveError> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        let mut entries = HashMap::new();
        if path.exists() {
            let mut skipped = 0;
            for line in BufReader::new(File::open(path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<Record>(&line) {
                    Ok(r) => {
                        entries.insert((r.provider, r.key), (r.fetched_at, r.value));
                    }
                    Err(_) => skipped += 1,
                }
            }
            if skipped > 0 {
                warn!(
                    "{}: skipped {skipped} unreadable cache lines",
                    path.display()
                );
            }
        }
        let writer = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            path: path.to_path_buf(),
            max_age_secs,
            entries: RwLock::new(entries),
            writer: Mutex::new(writer),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fresh cached value, if any, as of `now` (Unix seconds).
    pub fn get<T: DeserializeOwned>(&self, provider: &str, key: &str, now: i64) -> Option<T> {
        let entries = self.entries.read().expect("cache lock");
        let (at, value) = entries.get(&(provider.to_string(), key.to_string()))?;
        if now - at > self.max_age_secs {
            return None;
        }
        serde_json::from_value(value.clone()).ok()
    }

    pub fn put<T: Serialize>(
        &self,
        provider: &str,
        key: &str,
        now: i64,
        value: &T,
    ) -> Result<(), ArchiveError> {
        let value =
            serde_json::to_value(value).map_err(|e| ArchiveError::Malformed(e.to_string()))?;
        let record = Record {
            provider: provider.to_string(),
            key: key.to_string(),
            fetched_at: now,
            value,
        };
        let line =
            serde_json::to_string(&record).map_err(|e| ArchiveError::Malformed(e.to_string()))?;
        {
            let mut w = self.writer.lock().expect("cache writer lock");
            writeln!(w, "{line}")?;
            w.flush()?;
        }
        self.entries.write().expect("cache lock").insert(
            (record.provider, record.key),
            (record.fetched_at, record.value),
        );
        Ok(())
    }
}
