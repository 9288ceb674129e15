use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ontology::CategoryPath;

/// Candidate categories plus the ancestors kept by ancestor assistance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrunedTree {
    /// Candidates in their input (rank) order, deduplicated.
    candidates: Vec<CategoryPath>,
    /// Candidates and retained ancestors.
    nodes: BTreeSet<CategoryPath>,
}

/// Labels two paths must share, beyond the top-level root, to count as having
/// a common ancestor.
const SHARED_PREFIX: usize = 2;

/// Builds the candidate tree and prunes it. A candidate that shares no
/// ancestor below the top-level label with any other candidate keeps its
/// whole ancestor chain; every other internal node is dropped.
pub fn prune_tree(candidates: &[CategoryPath]) -> PrunedTree {
    let mut seen = BTreeSet::new();
    let candidates: Vec<CategoryPath> = candidates
        .iter()
        .filter(|c| seen.insert((*c).clone()))
        .cloned()
        .collect();
    let mut nodes: BTreeSet<CategoryPath> = candidates.iter().cloned().collect();
    for c in &candidates {
        if !shares_ancestor(c, &candidates) {
            nodes.extend(c.ancestors());
        }
    }
    PrunedTree { candidates, nodes }
}

fn shares_ancestor(c: &CategoryPath, all: &[CategoryPath]) -> bool {
    all.iter()
        .filter(|o| *o != c)
        .any(|o| c.common_prefix_len(o) >= SHARED_PREFIX)
}

impl PrunedTree {
    pub fn candidates(&self) -> &[CategoryPath] {
        &self.candidates
    }

    pub fn nodes(&self) -> &BTreeSet<CategoryPath> {
        &self.nodes
    }

    pub fn is_candidate(&self, path: &CategoryPath) -> bool {
        self.candidates.contains(path)
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Retained non-candidate ancestors of `candidate`, root first.
    pub fn retained_ancestors<'a>(
        &'a self,
        candidate: &'a CategoryPath,
    ) -> impl Iterator<Item = CategoryPath> + 'a {
        candidate
            .ancestors()
            .filter(move |a| self.nodes.contains(a) && !self.is_candidate(a))
    }
}
