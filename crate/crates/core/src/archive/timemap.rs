use std::collections::HashSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::ArchiveError;

/// One capture: where it lives and when it was taken.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Memento {
    pub datetime: DateTime<Utc>,
    pub uri: String,
}

/// A parsed link-format TimeMap page.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TimeMapPage {
    /// In document order, not deduplicated.
    pub mementos: Vec<Memento>,
    /// Target of a `rel="next"` link (a further page of this TimeMap).
    pub next_page: Option<String>,
    pub original: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Link {
    target: String,
    params: Vec<(String, String)>,
}

impl Link {
    fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(key))
            .map(|(_, v)| v.as_str())
    }

    fn rels(&self) -> Vec<String> {
        self.param("rel")
            .map(|r| r.split_whitespace().map(str::to_ascii_lowercase).collect())
            .unwrap_or_default()
    }
}

/// Splits link-format text into links. Commas and semicolons inside `<...>`
/// and quoted strings do not separate anything.
fn parse_links(text: &str) -> Result<Vec<Link>, ArchiveError> {
    let bad = |pos: usize, what: &str| {
        ArchiveError::Malformed(format!("link-format at byte {pos}: {what}"))
    };
    let bytes = text.as_bytes();
    let mut links = Vec::new();
    let mut i = 0;
    let skip_ws = |i: &mut usize| {
        while *i < bytes.len() && (bytes[*i] as char).is_ascii_whitespace() {
            *i += 1;
        }
    };
    loop {
        while i < bytes.len() && (bytes[i] == b',' || (bytes[i] as char).is_ascii_whitespace()) {
            i += 1;
        }
        if i >= bytes.len() {
            break;
        }
        if bytes[i] != b'<' {
            return Err(bad(i, "expected '<'"));
        }
        let close = text[i + 1..]
            .find('>')
            .ok_or_else(|| bad(i, "unterminated '<'"))?
            + i
            + 1;
        let target = text[i + 1..close].trim().to_string();
        i = close + 1;
        let mut params = Vec::new();
        loop {
            skip_ws(&mut i);
            if i >= bytes.len() || bytes[i] == b',' {
                break;
            }
            if bytes[i] != b';' {
                return Err(bad(i, "expected ';' or ','"));
            }
            i += 1;
            skip_ws(&mut i);
            let start = i;
            while i < bytes.len()
                && !matches!(bytes[i], b'=' | b';' | b',')
                && !(bytes[i] as char).is_ascii_whitespace()
            {
                i += 1;
            }
            let key = text[start..i].to_string();
            skip_ws(&mut i);
            let value = if i < bytes.len() && bytes[i] == b'=' {
                i += 1;
                skip_ws(&mut i);
                if i < bytes.len() && bytes[i] == b'"' {
                    let end = text[i + 1..]
                        .find('"')
                        .ok_or_else(|| bad(i, "unterminated quote"))?
                        + i
                        + 1;
                    let v = text[i + 1..end].to_string();
                    i = end + 1;
                    v
                } else {
                    let start = i;
                    while i < bytes.len() && !matches!(bytes[i], b';' | b',') {
                        i += 1;
                    }
                    text[start..i].trim().to_string()
                }
            } else {
                String::new()
            };
            if !key.is_empty() {
                params.push((key, value));
            }
        }
        links.push(Link { target, params });
    }
    Ok(links)
}

/// Parses an RFC 1123 / RFC 2822 datetime such as `Wed, 26 Feb 2014 09:08:46 GMT`.
pub fn parse_http_datetime(s: &str) -> Result<DateTime<Utc>, ArchiveError> {
    DateTime::parse_from_rfc2822(s.trim())
        .map(|d| d.with_timezone(&Utc))
        .map_err(|e| ArchiveError::Malformed(format!("bad datetime {s:?}: {e}")))
}

/// Parses one TimeMap page. Any link whose `rel` includes the `memento` token
/// is a capture and must carry a `datetime`.
pub fn parse_timemap(text: &str) -> Result<TimeMapPage, ArchiveError> {
    let mut page = TimeMapPage::default();
    for link in parse_links(text)? {
        let rels = link.rels();
        if rels.iter().any(|r| r == "memento") {
            let dt = link.param("datetime").ok_or_else(|| {
                ArchiveError::Malformed(format!("memento {} has no datetime", link.target))
            })?;
            page.mementos.push(Memento {
                datetime: parse_http_datetime(dt)?,
                uri: link.target,
            });
        } else if rels.iter().any(|r| r == "next") {
            page.next_page = Some(link.target);
        } else if rels.iter().any(|r| r == "original") {
            page.original = Some(link.target);
        }
    }
    Ok(page)
}

/// Everything the archives say about one URI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveEvidence {
    pub uri: String,
    pub archived: bool,
    pub memento_count: usize,
    /// Ascending, one per memento.
    pub memento_datetimes: Vec<DateTime<Utc>>,
    /// Sorted by datetime then URI.
    pub mementos: Vec<Memento>,
    /// Filled in once a request datetime is known.
    pub nearest_memento_uri: Option<String>,
    /// TimeMap pages read.
    pub pages: usize,
    /// More pages existed than the paging limit allowed.
    pub truncated: bool,
}

impl ArchiveEvidence {
    pub fn not_archived(uri: &str) -> Self {
        Self::from_mementos(uri, Vec::new(), 0, false)
    }

    /// Deduplicates by memento URI (first seen wins) and sorts.
    pub fn from_mementos(uri: &str, mementos: Vec<Memento>, pages: usize, truncated: bool) -> Self {
        let mut seen = HashSet::new();
        let mut mementos: Vec<Memento> = mementos
            .into_iter()
            .filter(|m| seen.insert(m.uri.clone()))
            .collect();
        mementos.sort();
        Self {
            uri: uri.to_string(),
            archived: !mementos.is_empty(),
            memento_count: mementos.len(),
            memento_datetimes: mementos.iter().map(|m| m.datetime).collect(),
            mementos,
            nearest_memento_uri: None,
            pages,
            truncated,
        }
    }
}

/// The memento closest in time to `requested`; ties go to the earlier one.
pub fn nearest_memento(
    evidence: &ArchiveEvidence,
    requested: DateTime<Utc>,
) -> Result<&Memento, ArchiveError> {
    evidence
        .mementos
        .iter()
        .min_by_key(|m| {
            (
                (m.datetime - requested).num_milliseconds().unsigned_abs(),
                m.datetime,
            )
        })
        .ok_or_else(|| ArchiveError::NotArchived(evidence.uri.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    const TM: &str = r#"<http://cs.odu.edu/>; rel="original",
<http://mg.example/timemap/link/http://cs.odu.edu/>; rel="self"; type="application/link-format",
<http://web.archive.org/web/20140226090846/http://cs.odu.edu:80/>; rel="first memento"; datetime="Wed, 26 Feb 2014 09:08:46 GMT",
<http://archive.example/a,b;c/20100101000000/http://cs.odu.edu/>; rel="memento"; datetime="Fri, 01 Jan 2010 00:00:00 GMT",
<http://web.archive.org/web/20150301000000/http://cs.odu.edu/>; rel="last memento"; datetime="Sun, 01 Mar 2015 00:00:00 GMT"
"#;

    #[test]
    fn parses_mementos_with_awkward_uris() {
        let page = parse_timemap(TM).unwrap();
        assert_eq!(page.mementos.len(), 3);
        assert_eq!(page.original.as_deref(), Some("http://cs.odu.edu/"));
        assert!(page.next_page.is_none());
        let ev = ArchiveEvidence::from_mementos("http://cs.odu.edu/", page.mementos, 1, false);
        assert_eq!(ev.memento_count, 3);
        assert!(ev.memento_datetimes.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(
            ev.mementos[0].uri,
            "http://archive.example/a,b;c/20100101000000/http://cs.odu.edu/"
        );
    }

    #[test]
    fn first_and_last_only() {
        let tm = r#"<http://a/1>; rel="first memento"; datetime="Mon, 01 Jan 2001 00:00:00 GMT", <http://a/2>; rel="last memento"; datetime="Tue, 01 Jan 2002 00:00:00 GMT""#;
        assert_eq!(parse_timemap(tm).unwrap().mementos.len(), 2);
    }

    #[test]
    fn next_page_link() {
        let tm = r#"<http://a/1>; rel="memento"; datetime="Mon, 01 Jan 2001 00:00:00 GMT", <http://mg/timemap/link/2/http://a/>; rel="next"; type="application/link-format""#;
        let p = parse_timemap(tm).unwrap();
        assert_eq!(
            p.next_page.as_deref(),
            Some("http://mg/timemap/link/2/http://a/")
        );
    }

    #[test]
    fn malformed_input_is_an_error() {
        assert!(parse_timemap("garbage").is_err());
        assert!(parse_timemap(r#"<http://a/1>; rel="memento""#).is_err());
        assert!(parse_timemap(r#"<http://a/1>; rel="memento"; datetime="yesterday""#).is_err());
        assert!(parse_timemap("").unwrap().mementos.is_empty());
    }

    #[test]
    fn nearest_ties_go_earlier() {
        let m = |y, uri: &str| Memento {
            datetime: Utc.with_ymd_and_hms(y, 1, 1, 0, 0, 0).unwrap(),
            uri: uri.into(),
        };
        let ev = ArchiveEvidence::from_mementos("u", vec![m(2012, "b"), m(2010, "a")], 1, false);
        let at = |y, mo, d| Utc.with_ymd_and_hms(y, mo, d, 0, 0, 0).unwrap();
        assert_eq!(nearest_memento(&ev, at(2012, 1, 1)).unwrap().uri, "b");
        assert_eq!(nearest_memento(&ev, at(2000, 1, 1)).unwrap().uri, "a");
        // 2011-01-01 is 365 days after 2010-01-01 and 365 days before 2012-01-01
        assert_eq!(nearest_memento(&ev, at(2011, 1, 1)).unwrap().uri, "a");
        assert!(nearest_memento(&ArchiveEvidence::not_archived("x"), at(2011, 1, 1)).is_err());
    }
}
