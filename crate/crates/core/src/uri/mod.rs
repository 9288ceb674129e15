//! URI-level processing: parsing, SURT canonicalization, depth, feature
//! extraction, pattern detection and dictionary word segmentation.
//!
//! Everything here is a pure function over immutable inputs. The bundled
//! stop-word list, word lexicon and public-suffix snapshot are loaded once and
//! shared.

mod parse;
mod patterns;
mod segment;
mod suffix;
mod tokenize;

pub use parse::{canonicalize_surt, depth, surt_to_uri, ParsedUri, UriComponent, UriError};
pub(crate) use parse::{depth_of, strip_www};
pub use patterns::{
    detect_patterns, detect_patterns_parsed, HostnamePatterns, Location, PathPatterns, Pattern,
    UriPatternReport, LONG_STRING_LEN, SLUG_PIECE_LEN,
};
pub use segment::{segment_words, Segment, WordLexicon};
pub use suffix::SuffixList;
pub use tokenize::{
    all_gram_count, all_grams, char_ngrams, tokenize, StopWords, TokenBag, TokenConfig,
    TokenMethod, Tokenizer, Variants, ALL_GRAM_MAX, ALL_GRAM_MIN,
};
