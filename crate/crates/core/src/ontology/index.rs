use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::category::CategoryPath;
use crate::uri::{canonicalize_surt, UriError};

/// One categorized URI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyEntry {
    pub category: CategoryPath,
    pub uri: String,
    pub surt: String,
    pub title: Option<String>,
    pub description: Option<String>,
}

impl OntologyEntry {
    pub fn new(
        category: CategoryPath,
        uri: &str,
        title: Option<String>,
        description: Option<String>,
    ) -> Result<Self, UriError> {
        let uri = uri.trim();
        Ok(Self {
            category,
            surt: canonicalize_surt(uri)?,
            uri: uri.to_string(),
            title: title.filter(|t| !t.trim().is_empty()),
            description: description.filter(|d| !d.trim().is_empty()),
        })
    }
}

/// Counters collected while building an index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub records_seen: usize,
    pub retained: usize,
    pub missing_fields: usize,
    pub excluded_category: usize,
    pub duplicates: usize,
    /// Records that could not be parsed at all (bad field count, bad URI, bad encoding).
    pub malformed: usize,
}

/// Entries grouped by their full category path, with a unique SURT lookup.
#[derive(Debug, Clone, Default)]
pub struct CategoryIndex {
    entries: Vec<OntologyEntry>,
    by_category: BTreeMap<CategoryPath, Vec<usize>>,
    by_surt: HashMap<String, usize>,
    report: IngestReport,
}

impl CategoryIndex {
    /// Builds an index keeping the first entry seen for each SURT.
    pub fn from_entries<I: IntoIterator<Item = OntologyEntry>>(entries: I) -> Self {
        let mut index = Self::default();
        for e in entries {
            index.report.records_seen += 1;
            index.insert(e);
        }
        index
    }

    /// Returns false when the SURT was already present.
    pub(crate) fn insert(&mut self, entry: OntologyEntry) -> bool {
        if self.by_surt.contains_key(&entry.surt) {
            self.report.duplicates += 1;
            return false;
        }
        let id = self.entries.len();
        self.by_surt.insert(entry.surt.clone(), id);
        self.by_category
            .entry(entry.category.clone())
            .or_default()
            .push(id);
        self.entries.push(entry);
        self.report.retained += 1;
        true
    }

    pub(crate) fn report_mut(&mut self) -> &mut IngestReport {
        &mut self.report
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ingestion order.
    pub fn entries(&self) -> &[OntologyEntry] {
        &self.entries
    }

    /// Full category paths in lexicographic order.
    pub fn categories(&self) -> impl Iterator<Item = &CategoryPath> {
        self.by_category.keys()
    }

    pub fn category_count(&self) -> usize {
        self.by_category.len()
    }

    /// Entries filed exactly under `path`.
    pub fn entries_in<'a>(
        &'a self,
        path: &CategoryPath,
    ) -> impl Iterator<Item = &'a OntologyEntry> + 'a {
        self.by_category
            .get(path)
            .into_iter()
            .flatten()
            .map(move |&i| &self.entries[i])
    }

    /// Entries filed under `path` or any of its descendants.
    pub fn entries_under<'a>(
        &'a self,
        path: &'a CategoryPath,
    ) -> impl Iterator<Item = &'a OntologyEntry> + 'a {
        self.by_category
            .range(path.clone()..)
            .take_while(move |(p, _)| *p == path || path.is_ancestor_of(p))
            .flat_map(move |(_, ids)| ids.iter().map(move |&i| &self.entries[i]))
    }

    pub fn by_surt(&self, surt: &str) -> Option<&OntologyEntry> {
        self.by_surt.get(surt).map(|&i| &self.entries[i])
    }

    pub fn lookup_uri(&self, uri: &str) -> Result<Option<&OntologyEntry>, UriError> {
        let surt = canonicalize_surt(uri)?;
        Ok(self.by_surt(&surt))
    }

    pub fn top_labels(&self) -> BTreeSet<&str> {
        self.by_category.keys().map(|p| p.top()).collect()
    }
}
