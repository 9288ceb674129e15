use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Ordered category labels, root first: `Computers/Computer_Science/...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CategoryPath(Vec<String>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CategoryError {
    #[error("category path is empty")]
    Empty,
    #[error("category label {0:?} is empty or contains '/'")]
    BadLabel(String),
}

impl CategoryPath {
    pub fn new<I, S>(labels: I) -> Result<Self, CategoryError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(CategoryError::Empty);
        }
        if let Some(bad) = labels.iter().find(|l| l.is_empty() || l.contains('/')) {
            return Err(CategoryError::BadLabel(bad.clone()));
        }
        Ok(Self(labels))
    }

    /// Parses `A/B/C`, tolerating a leading `Top/` and stray slashes.
    pub fn parse(s: &str) -> Result<Self, CategoryError> {
        let s = s.trim();
        let s = s.strip_prefix("Top/").unwrap_or(s);
        let labels: Vec<&str> = s
            .split('/')
            .filter(|l| !l.trim().is_empty())
            .map(str::trim)
            .collect();
        if labels == ["Top"] {
            return Err(CategoryError::Empty);
        }
        Self::new(labels)
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn top(&self) -> &str {
        &self.0[0]
    }

    /// The first `len` labels, or `None` when `len` is 0 or exceeds the depth.
    pub fn prefix(&self, len: usize) -> Option<CategoryPath> {
        if len == 0 || len > self.0.len() {
            return None;
        }
        Some(Self(self.0[..len].to_vec()))
    }

    /// Proper ancestors, root first.
    pub fn ancestors(&self) -> impl Iterator<Item = CategoryPath> + '_ {
        (1..self.0.len()).map(move |n| Self(self.0[..n].to_vec()))
    }

    pub fn parent(&self) -> Option<CategoryPath> {
        self.prefix(self.0.len().saturating_sub(1))
    }

    pub fn is_ancestor_of(&self, other: &CategoryPath) -> bool {
        self.0.len() < other.0.len() && other.0.starts_with(&self.0)
    }

    /// Number of leading labels shared with `other`.
    pub fn common_prefix_len(&self, other: &CategoryPath) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .take_while(|(a, b)| a == b)
            .count()
    }
}

impl fmt::Display for CategoryPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join("/"))
    }
}

impl FromStr for CategoryPath {
    type Err = CategoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl TryFrom<String> for CategoryPath {
    type Error = CategoryError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::parse(&s)
    }
}

impl From<CategoryPath> for String {
    fn from(p: CategoryPath) -> String {
        p.to_string()
    }
}
