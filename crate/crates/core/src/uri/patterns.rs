use std::fmt;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::parse::{ParsedUri, UriError};

/// Minimum run of letters that counts as a long string.
pub const LONG_STRING_LEN: usize = 10;
/// Minimum letters per piece for the long-slug pattern.
pub const SLUG_PIECE_LEN: usize = 5;

static DATE_SLASHED: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?:^|/)(?:19|20)\d{2}/(?:0?[1-9]|1[0-2])/(?:0?[1-9]|[12]\d|3[01])(?:/|$|[^0-9])")
        .unwrap()
});
static DATE_DASHED: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?:^|[^0-9])(?:19|20)\d{2}-(?:0[1-9]|1[0-2])-(?:0[1-9]|[12]\d|3[01])(?:$|[^0-9])")
        .unwrap()
});
static PERCENT: Lazy<Regex> = Lazy::new(|| Regex::new(r"%[0-9A-Fa-f]{2}").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    LongStrings,
    LongSlugs,
    Numbers,
    CaseChange,
    Query,
    Port,
    IpAddress,
    PercentEncoding,
    Date,
}

impl Pattern {
    pub const ALL: [Pattern; 9] = [
        Pattern::LongStrings,
        Pattern::LongSlugs,
        Pattern::Numbers,
        Pattern::CaseChange,
        Pattern::Query,
        Pattern::Port,
        Pattern::IpAddress,
        Pattern::PercentEncoding,
        Pattern::Date,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Pattern::LongStrings => "long strings",
            Pattern::LongSlugs => "long slugs",
            Pattern::Numbers => "numbers",
            Pattern::CaseChange => "change in case",
            Pattern::Query => "query",
            Pattern::Port => "port number",
            Pattern::IpAddress => "ip address",
            Pattern::PercentEncoding => "percent-encoding",
            Pattern::Date => "date",
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Location {
    Hostname,
    Path,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostnamePatterns {
    pub long_strings: bool,
    pub long_slugs: bool,
    pub numbers: bool,
    pub case_change: bool,
    pub port: bool,
    pub ip_host: bool,
}

/// Path flags. The path location covers the query string too.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathPatterns {
    pub long_strings: bool,
    pub long_slugs: bool,
    pub numbers: bool,
    pub case_change: bool,
    pub query: bool,
    pub percent_encoding: bool,
    pub date: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UriPatternReport {
    pub hostname: HostnamePatterns,
    pub path: PathPatterns,
}

impl UriPatternReport {
    /// `None` where a pattern is not defined for a location.
    pub fn get(&self, pattern: Pattern, location: Location) -> Option<bool> {
        let h = &self.hostname;
        let p = &self.path;
        match (pattern, location) {
            (Pattern::LongStrings, Location::Hostname) => Some(h.long_strings),
            (Pattern::LongStrings, Location::Path) => Some(p.long_strings),
            (Pattern::LongSlugs, Location::Hostname) => Some(h.long_slugs),
            (Pattern::LongSlugs, Location::Path) => Some(p.long_slugs),
            (Pattern::Numbers, Location::Hostname) => Some(h.numbers),
            (Pattern::Numbers, Location::Path) => Some(p.numbers),
            (Pattern::CaseChange, Location::Hostname) => Some(h.case_change),
            (Pattern::CaseChange, Location::Path) => Some(p.case_change),
            (Pattern::Query, Location::Path) => Some(p.query),
            (Pattern::Port, Location::Hostname) => Some(h.port),
            (Pattern::IpAddress, Location::Hostname) => Some(h.ip_host),
            (Pattern::PercentEncoding, Location::Path) => Some(p.percent_encoding),
            (Pattern::Date, Location::Path) => Some(p.date),
            _ => None,
        }
    }
}

pub fn detect_patterns(uri: &str) -> Result<UriPatternReport, UriError> {
    let parsed = ParsedUri::parse(uri)?;
    Ok(detect_patterns_parsed(uri, &parsed))
}

/// `raw` is the original text, used for case-change detection.
pub fn detect_patterns_parsed(raw: &str, parsed: &ParsedUri) -> UriPatternReport {
    let (raw_host, raw_path) = split_raw(raw.trim());
    let host = parsed.host.as_str();
    let path = parsed.path_and_query().to_lowercase();

    UriPatternReport {
        hostname: HostnamePatterns {
            long_strings: has_long_string(host),
            long_slugs: has_long_slugs(host),
            numbers: host.bytes().any(|b| b.is_ascii_digit()),
            case_change: has_case_change(raw_host),
            port: parsed.port.is_some() || raw_host_has_port(raw_host),
            ip_host: parsed.is_ip,
        },
        path: PathPatterns {
            long_strings: has_long_string(&path),
            long_slugs: has_long_slugs(&path),
            numbers: path.bytes().any(|b| b.is_ascii_digit()),
            case_change: has_case_change(raw_path),
            query: parsed.query.is_some(),
            percent_encoding: PERCENT.is_match(&path),
            date: DATE_SLASHED.is_match(&path) || DATE_DASHED.is_match(&path),
        },
    }
}

/// Host (with port, without userinfo) and the remainder, from the unparsed text.
fn split_raw(raw: &str) -> (&str, &str) {
    let after_scheme = match raw.find("://") {
        Some(i) => &raw[i + 3..],
        None => raw,
    };
    let end = after_scheme
        .find(['/', '?', '#'])
        .unwrap_or(after_scheme.len());
    let authority = &after_scheme[..end];
    let host = authority.rsplit_once('@').map_or(authority, |(_, h)| h);
    let rest = &after_scheme[end..];
    let rest = rest.split_once('#').map_or(rest, |(r, _)| r);
    (host, rest)
}

fn raw_host_has_port(raw_host: &str) -> bool {
    let tail = match raw_host.rfind(']') {
        Some(i) => &raw_host[i + 1..],
        None => raw_host,
    };
    match tail.rsplit_once(':') {
        Some((_, p)) => !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()),
        None => false,
    }
}

fn has_long_string(s: &str) -> bool {
    let mut run = 0usize;
    for c in s.chars() {
        if c.is_ascii_alphabetic() {
            run += 1;
            if run >= LONG_STRING_LEN {
                return true;
            }
        } else {
            run = 0;
        }
    }
    false
}

/// Two or more purely alphabetic pieces of at least five letters, where pieces
/// are delimited by non-alphanumeric characters.
fn has_long_slugs(s: &str) -> bool {
    s.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|piece| {
            piece.len() >= SLUG_PIECE_LEN && piece.bytes().all(|b| b.is_ascii_alphabetic())
        })
        .nth(1)
        .is_some()
}

fn has_case_change(s: &str) -> bool {
    s.as_bytes()
        .windows(2)
        .any(|w| w[0].is_ascii_lowercase() && w[1].is_ascii_uppercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_examples() {
        assert!(
            detect_patterns("http://radiotunis.com")
                .unwrap()
                .hostname
                .long_strings
        );
        assert!(detect_patterns("http://911.com").unwrap().hostname.numbers);
        assert!(
            detect_patterns("http://63.135.118.69/")
                .unwrap()
                .hostname
                .ip_host
        );
        let r =
            detect_patterns("http://elmundo-eldia.com/1999/08/29/opinion/1001023218.html").unwrap();
        assert!(r.path.date);
        assert!(r.path.numbers);
        assert!(r.hostname.long_slugs);
    }

    #[test]
    fn other_examples() {
        let r = detect_patterns(
            "http://www.arnosoftwaredev.blogspot.com/2005/01/sorting-algorithms-visualized.html",
        )
        .unwrap();
        assert!(r.path.long_slugs);
        assert!(r.path.long_strings);
        assert!(r.hostname.long_strings);

        let r = detect_patterns("http://zeekoo.com/ZeeKooGids.php").unwrap();
        assert!(r.path.case_change);
        assert!(!r.hostname.case_change);

        let r = detect_patterns("http://findagrave.com/cgi-bin/fg.cgi?page=gr&GRid=1795").unwrap();
        assert!(r.path.query);

        let r = detect_patterns("http://www3.gencat.cat:81/justicia/justiterm/index.htm").unwrap();
        assert!(r.hostname.port);
        assert!(r.hostname.numbers);

        let r = detect_patterns("http://tinet.cat/%7ekosina").unwrap();
        assert!(r.path.percent_encoding);

        let r = detect_patterns("http://example.com/posts/2012-03-02-title").unwrap();
        assert!(r.path.date);
    }

    #[test]
    fn negatives() {
        let r = detect_patterns("http://cs.odu.edu/").unwrap();
        assert_eq!(r, UriPatternReport::default());
        assert!(
            !detect_patterns("http://a.com/1850/01/01/")
                .unwrap()
                .path
                .date
        );
        assert!(
            !detect_patterns("http://a.com/2012/13/01/")
                .unwrap()
                .path
                .date
        );
        // default port given explicitly is still an explicit port in the text
        assert!(detect_patterns("http://a.com:80/").unwrap().hostname.port);
        assert!(
            !detect_patterns("http://music-art.com/")
                .unwrap()
                .hostname
                .long_slugs
        );
    }

    #[test]
    fn dashes_are_none() {
        let r = UriPatternReport::default();
        assert_eq!(r.get(Pattern::Query, Location::Hostname), None);
        assert_eq!(r.get(Pattern::Port, Location::Path), None);
        assert_eq!(r.get(Pattern::IpAddress, Location::Path), None);
        assert_eq!(r.get(Pattern::Date, Location::Hostname), None);
        assert_eq!(r.get(Pattern::PercentEncoding, Location::Hostname), None);
        assert_eq!(r.get(Pattern::Numbers, Location::Path), Some(false));
    }
}
