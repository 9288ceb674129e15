use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use super::parse::{ParsedUri, UriError};

/// Shortest and longest character n-gram used by the all-gram methods.
pub const ALL_GRAM_MIN: usize = 4;
pub const ALL_GRAM_MAX: usize = 8;

static BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

static DEFAULT_STOPWORDS: Lazy<Arc<StopWords>> =
    Lazy::new(|| Arc::new(StopWords::from_lines(BUNDLED_STOPWORDS)));

/// How a URI is turned into features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenMethod {
    /// Alphabetic runs of length >= 3, scheme tokens removed.
    Tokens,
    /// 4..8-grams inside each token; tokens shorter than 4 letters are kept whole.
    AllGramsFromTokens,
    /// 4..8-grams over the URI with scheme, punctuation and digits removed.
    AllGramsFromUri,
    /// 3-grams inside each token. Used by the deep classification stage.
    TrigramsFromTokens,
}

impl TokenMethod {
    pub const ALL: [TokenMethod; 4] = [
        TokenMethod::Tokens,
        TokenMethod::AllGramsFromTokens,
        TokenMethod::AllGramsFromUri,
        TokenMethod::TrigramsFromTokens,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TokenMethod::Tokens => "tokens",
            TokenMethod::AllGramsFromTokens => "all-grams-tokens",
            TokenMethod::AllGramsFromUri => "all-grams-uri",
            TokenMethod::TrigramsFromTokens => "trigrams-tokens",
        }
    }
}

impl fmt::Display for TokenMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TokenMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown token method {s:?}"))
    }
}

/// Optional preprocessing applied before features are generated.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct Variants {
    pub strip_tld: bool,
    pub strip_numbers: bool,
    pub strip_stopwords: bool,
}

impl Variants {
    pub const NONE: Variants = Variants {
        strip_tld: false,
        strip_numbers: false,
        strip_stopwords: false,
    };
    pub const TLD: Variants = Variants {
        strip_tld: true,
        strip_numbers: false,
        strip_stopwords: false,
    };
    pub const TLD_NUMBERS: Variants = Variants {
        strip_tld: true,
        strip_numbers: true,
        strip_stopwords: false,
    };
    pub const TLD_STOPWORDS: Variants = Variants {
        strip_tld: true,
        strip_numbers: false,
        strip_stopwords: true,
    };
}

impl fmt::Display for Variants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.strip_tld {
            parts.push("strip-tld");
        }
        if self.strip_numbers {
            parts.push("strip-numbers");
        }
        if self.strip_stopwords {
            parts.push("strip-stopwords");
        }
        if parts.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&parts.join(","))
        }
    }
}

impl FromStr for Variants {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut v = Variants::NONE;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "none" => {}
                "strip-tld" | "tld" => v.strip_tld = true,
                "strip-numbers" | "numbers" => v.strip_numbers = true,
                "strip-stopwords" | "stopwords" => v.strip_stopwords = true,
                other => return Err(format!("unknown variant {other:?}")),
            }
        }
        Ok(v)
    }
}

/// Method plus variants; the configuration a model is trained against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenConfig {
    pub method: TokenMethod,
    pub variants: Variants,
}

impl TokenConfig {
    pub const fn new(method: TokenMethod, variants: Variants) -> Self {
        Self { method, variants }
    }

    /// The first-level configuration used for live requests.
    pub const fn first_level_default() -> Self {
        Self::new(TokenMethod::AllGramsFromUri, Variants::TLD_NUMBERS)
    }
}

impl fmt::Display for TokenConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{}", self.method, self.variants)
    }
}

/// Multiset of features from one tokenization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBag {
    pub method: TokenMethod,
    pub variants: Variants,
    /// In generation order, with repeats.
    pub features: Vec<String>,
}

impl TokenBag {
    pub fn new(config: TokenConfig, features: Vec<String>) -> Self {
        Self {
            method: config.method,
            variants: config.variants,
            features,
        }
    }

    pub fn config(&self) -> TokenConfig {
        TokenConfig::new(self.method, self.variants)
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn distinct(&self) -> BTreeSet<&str> {
        self.features.iter().map(String::as_str).collect()
    }

    pub fn counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for f in &self.features {
            *counts.entry(f.as_str()).or_insert(0) += 1;
        }
        counts
    }
}

/// A stop-word set. Words are stored lowercase.
#[derive(Debug, Clone, Default)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    /// One word per line; blank lines and `#` comments are skipped.
    pub fn from_lines(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn bundled() -> Arc<StopWords> {
        DEFAULT_STOPWORDS.clone()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Turns URIs (and free text) into [`TokenBag`]s.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    stopwords: Arc<StopWords>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self {
            stopwords: StopWords::bundled(),
        }
    }
}

impl Tokenizer {
    pub fn with_stopwords(stopwords: Arc<StopWords>) -> Self {
        Self { stopwords }
    }

    pub fn stopwords(&self) -> &StopWords {
        &self.stopwords
    }

    pub fn tokenize(&self, uri: &str, config: TokenConfig) -> Result<TokenBag, UriError> {
        let parsed = ParsedUri::parse(uri)?;
        Ok(self.tokenize_parsed(&parsed, config))
    }

    pub fn tokenize_parsed(&self, parsed: &ParsedUri, config: TokenConfig) -> TokenBag {
        let text = uri_text(parsed, config.variants);
        let features = match config.method {
            TokenMethod::AllGramsFromUri => {
                // digits go unconditionally for this method
                let runs = alpha_runs(&text, true);
                let kept: String = runs
                    .into_iter()
                    .filter(|r| !is_scheme_token(r))
                    .filter(|r| !(config.variants.strip_stopwords && self.stopwords.contains(r)))
                    .collect();
                all_grams(&kept)
            }
            method => {
                let tokens = self.word_tokens(&text, config.variants);
                expand_tokens(method, &tokens)
            }
        };
        TokenBag::new(config, features)
    }

    /// Tokens from free text (titles, descriptions) under the same rules as URI tokens.
    pub fn tokenize_text(&self, text: &str, config: TokenConfig) -> TokenBag {
        let lowered = text.to_lowercase();
        let features = match config.method {
            TokenMethod::AllGramsFromUri => {
                let joined: String = alpha_runs(&lowered, true)
                    .into_iter()
                    .filter(|r| !(config.variants.strip_stopwords && self.stopwords.contains(r)))
                    .collect();
                all_grams(&joined)
            }
            method => {
                let tokens = self.word_tokens(&lowered, config.variants);
                expand_tokens(method, &tokens)
            }
        };
        TokenBag::new(config, features)
    }

    fn word_tokens(&self, text: &str, variants: Variants) -> Vec<String> {
        alpha_runs(text, variants.strip_numbers)
            .into_iter()
            .filter(|t| !is_scheme_token(t))
            .filter(|t| t.chars().count() > 2)
            .filter(|t| !(variants.strip_stopwords && self.stopwords.contains(t)))
            .collect()
    }
}

/// Tokenize with the bundled stop-word list.
pub fn tokenize(uri: &str, method: TokenMethod, variants: Variants) -> Result<TokenBag, UriError> {
    Tokenizer::default().tokenize(uri, TokenConfig::new(method, variants))
}

fn is_scheme_token(t: &str) -> bool {
    t == "http" || t == "https"
}

/// Lowercased URI text without the scheme: host, port, path, query.
fn uri_text(parsed: &ParsedUri, variants: Variants) -> String {
    let host = if variants.strip_tld {
        parsed.host_without_tld()
    } else {
        parsed.host.as_str()
    };
    let mut text = host.to_string();
    if let Some(port) = parsed.port {
        text.push(':');
        text.push_str(&port.to_string());
    }
    text.push_str(&parsed.path);
    if let Some(q) = &parsed.query {
        text.push('?');
        text.push_str(q);
    }
    text.to_lowercase()
}

/// Maximal runs of alphabetic characters. With `drop_digits`, digits are deleted
/// first so letters on either side join into one run.
fn alpha_runs(text: &str, drop_digits: bool) -> Vec<String> {
    let mut runs = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        if c.is_alphabetic() {
            cur.extend(c.to_lowercase());
        } else if drop_digits && c.is_ascii_digit() {
            continue;
        } else if !cur.is_empty() {
            runs.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        runs.push(cur);
    }
    runs
}

fn expand_tokens(method: TokenMethod, tokens: &[String]) -> Vec<String> {
    match method {
        TokenMethod::Tokens => tokens.to_vec(),
        TokenMethod::AllGramsFromTokens => tokens
            .iter()
            .flat_map(|t| {
                if t.chars().count() < ALL_GRAM_MIN {
                    vec![t.clone()]
                } else {
                    all_grams(t)
                }
            })
            .collect(),
        TokenMethod::TrigramsFromTokens => tokens
            .iter()
            .flat_map(|t| {
                if t.chars().count() <= 3 {
                    vec![t.clone()]
                } else {
                    char_ngrams(t, 3).map(str::to_string).collect()
                }
            })
            .collect(),
        TokenMethod::AllGramsFromUri => tokens.iter().flat_map(|t| all_grams(t)).collect(),
    }
}

/// Character n-grams of `s`, left to right.
pub fn char_ngrams(s: &str, n: usize) -> impl Iterator<Item = &str> {
    let bounds: Vec<usize> = s
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(s.len()))
        .collect();
    let windows = if n == 0 || bounds.len() <= n {
        0
    } else {
        bounds.len() - n
    };
    (0..windows).map(move |i| &s[bounds[i]..bounds[i + n]])
}

/// All 4- through 8-grams of `s`, grouped by n ascending.
pub fn all_grams(s: &str) -> Vec<String> {
    (ALL_GRAM_MIN..=ALL_GRAM_MAX)
        .flat_map(|n| char_ngrams(s, n).map(str::to_string).collect::<Vec<_>>())
        .collect()
}

/// Number of all-grams a string of `len` characters produces.
pub fn all_gram_count(len: usize) -> usize {
    (ALL_GRAM_MIN..=ALL_GRAM_MAX)
        .map(|n| (len + 1).saturating_sub(n))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(features: &[&str]) -> BTreeSet<String> {
        features.iter().map(|s| s.to_string()).collect()
    }

    fn bag_set(bag: &TokenBag) -> BTreeSet<String> {
        bag.features.iter().cloned().collect()
    }

    #[test]
    fn tokens_method() {
        let bag = tokenize(
            "https://odu.edu/compsci",
            TokenMethod::Tokens,
            Variants::NONE,
        )
        .unwrap();
        assert_eq!(bag.features, vec!["odu", "edu", "compsci"]);
    }

    #[test]
    fn all_grams_from_tokens_keeps_short_tokens_whole() {
        let bag = tokenize(
            "https://odu.edu/compsci",
            TokenMethod::AllGramsFromTokens,
            Variants::NONE,
        )
        .unwrap();
        assert_eq!(bag.len(), 12);
        assert_eq!(
            bag_set(&bag),
            set(&[
                "odu", "edu", "comp", "omps", "mpsc", "psci", "comps", "ompsc", "mpsci", "compsc",
                "ompsci", "compsci"
            ])
        );
    }

    #[test]
    fn all_grams_from_uri_drops_scheme_punctuation_and_digits() {
        let bag = tokenize(
            "http://odu.edu/compsci",
            TokenMethod::AllGramsFromUri,
            Variants::NONE,
        )
        .unwrap();
        assert_eq!(bag.len(), all_gram_count("odueducompsci".len()));
        assert_eq!(bag.features.first().unwrap(), "odue");
        assert_eq!(bag.features.last().unwrap(), "ucompsci");
        let digits = tokenize(
            "http://a1b2c3d.com/9x",
            TokenMethod::AllGramsFromUri,
            Variants::NONE,
        )
        .unwrap();
        assert!(digits
            .features
            .iter()
            .all(|f| !f.chars().any(|c| c.is_ascii_digit())));
        assert_eq!(digits.features[0], "abcd");
    }

    #[test]
    fn strip_tld_removes_effective_suffix() {
        let bag = tokenize(
            "http://www.bbc.co.uk/news",
            TokenMethod::Tokens,
            Variants::TLD,
        )
        .unwrap();
        assert_eq!(bag.features, vec!["www", "bbc", "news"]);
        let bag = tokenize(
            "https://odu.edu/compsci",
            TokenMethod::AllGramsFromUri,
            Variants::TLD,
        )
        .unwrap();
        assert_eq!(bag.features[0], "oduc");
    }

    #[test]
    fn strip_numbers_joins_tokens() {
        let plain = tokenize("http://abc123def.com/", TokenMethod::Tokens, Variants::NONE).unwrap();
        assert_eq!(plain.features, vec!["abc", "def", "com"]);
        let stripped = tokenize(
            "http://abc123def.com/",
            TokenMethod::Tokens,
            Variants::TLD_NUMBERS,
        )
        .unwrap();
        assert_eq!(stripped.features, vec!["abcdef"]);
    }

    #[test]
    fn strip_stopwords() {
        let bag = tokenize(
            "http://thenews.com/about/the-best-of-music",
            TokenMethod::Tokens,
            Variants::TLD_STOPWORDS,
        )
        .unwrap();
        assert_eq!(bag.features, vec!["thenews", "best", "music"]);
        let grams = tokenize(
            "http://the-music.com/",
            TokenMethod::AllGramsFromUri,
            Variants::TLD_STOPWORDS,
        )
        .unwrap();
        assert_eq!(grams.features, all_grams("music"));
    }

    #[test]
    fn empty_after_stripping_is_an_empty_bag() {
        let bag = tokenize(
            "http://a.io/1/2",
            TokenMethod::Tokens,
            Variants::TLD_NUMBERS,
        )
        .unwrap();
        assert!(bag.is_empty());
    }

    #[test]
    fn trigrams() {
        let bag = Tokenizer::default()
            .tokenize(
                "http://odu.edu/comp",
                TokenConfig::new(TokenMethod::TrigramsFromTokens, Variants::NONE),
            )
            .unwrap();
        assert_eq!(bag.features, vec!["odu", "edu", "com", "omp"]);
    }

    #[test]
    fn text_tokenization() {
        let bag = Tokenizer::default().tokenize_text(
            "Old Dominion University, Norfolk",
            TokenConfig::new(TokenMethod::Tokens, Variants::NONE),
        );
        assert_eq!(
            bag.features,
            vec!["old", "dominion", "university", "norfolk"]
        );
    }

    #[test]
    fn config_strings_parse_back() {
        for m in TokenMethod::ALL {
            assert_eq!(m.as_str().parse::<TokenMethod>().unwrap(), m);
        }
        let v = Variants::TLD_NUMBERS;
        assert_eq!(v.to_string().parse::<Variants>().unwrap(), v);
        assert_eq!("none".parse::<Variants>().unwrap(), Variants::NONE);
    }

    #[test]
    fn bundled_stopwords_loaded() {
        let sw = StopWords::bundled();
        assert_eq!(sw.len(), 179);
        assert!(sw.contains("the"));
    }

    #[test]
    fn ngram_edge_cases() {
        assert_eq!(char_ngrams("abc", 4).count(), 0);
        assert_eq!(char_ngrams("abcd", 4).collect::<Vec<_>>(), vec!["abcd"]);
        assert_eq!(all_gram_count(0), 0);
        assert_eq!(all_gram_count(3), 0);
        assert_eq!(all_gram_count(13), 40);
    }
}
