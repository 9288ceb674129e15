//! Recommending archived replacements for lost web pages: URI analysis,
//! ontology lookup, hierarchical classification, archive evidence and ranking.

pub mod archive;
pub mod deep;
pub mod nb;
pub mod ontology;
pub mod pipeline;
pub mod rank;
pub mod report;
pub mod uri;
