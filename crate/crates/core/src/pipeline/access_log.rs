use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, FixedOffset};
use flate2::read::MultiGzDecoder;
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::uri::ParsedUri;

static BUNDLED_CCTLDS: &str = include_str!("../../data/english_cctlds.txt");

static ENGLISH_CCTLDS: Lazy<HashSet<String>> = Lazy::new(|| {
    BUNDLED_CCTLDS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
});

/// Final-segment extensions treated as HTML pages; no extension also counts.
pub const HTML_EXTENSIONS: [&str; 7] = ["html", "htm", "php", "asp", "aspx", "jsp", "cgi"];

/// One request line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessLogRecord {
    pub client_ip: String,
    pub access_time: DateTime<FixedOffset>,
    pub method: String,
    pub uri: String,
    pub protocol: String,
    pub status: u16,
    pub bytes_sent: Option<u64>,
    pub referrer: String,
    pub user_agent: String,
}

/// Splits on whitespace, keeping `"..."` and `[...]` groups as single fields
/// (without their delimiters).
fn split_fields(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut chars = line.trim().chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let close = match c {
            '"' => Some('"'),
            '[' => Some(']'),
            _ => None,
        };
        let mut field = String::new();
        if let Some(close) = close {
            chars.next();
            let mut escaped = false;
            for ch in chars.by_ref() {
                if escaped {
                    field.push(ch);
                    escaped = false;
                } else if ch == '\\' && close == '"' {
                    escaped = true;
                } else if ch == close {
                    break;
                } else {
                    field.push(ch);
                }
            }
        } else {
            while let Some(&ch) = chars.peek() {
                if ch.is_whitespace() {
                    break;
                }
                field.push(ch);
                chars.next();
            }
        }
        fields.push(field);
    }
    fields
}

fn parse_time(s: &str) -> Option<DateTime<FixedOffset>> {
    DateTime::parse_from_str(s, "%d/%b/%Y:%H:%M:%S %z")
        .or_else(|_| DateTime::parse_from_rfc3339(s))
        .ok()
}

impl AccessLogRecord {
    /// Parses a nine-field line: client IP, `[access time]`, method, URI,
    /// protocol, status, bytes, `"referrer"`, `"user agent"`.
    pub fn parse(line: &str) -> Option<Self> {
        let f = split_fields(line);
        if f.len() != 9 {
            return None;
        }
        let status: u16 = f[5].parse().ok().filter(|s| (100..=999).contains(s))?;
        Some(Self {
            client_ip: f[0].clone(),
            access_time: parse_time(&f[1])?,
            method: f[2].clone(),
            uri: f[3].clone(),
            protocol: f[4].clone(),
            status,
            bytes_sent: f[6].parse().ok(),
            referrer: f[7].clone(),
            user_agent: f[8].clone(),
        })
    }

    /// The requested page: for archive replay paths such as
    /// `/web/20120208000000/http://example.com/` the embedded URI, otherwise
    /// the URI field itself.
    pub fn requested_uri(&self) -> &str {
        original_from_replay(&self.uri).unwrap_or(&self.uri)
    }
}

fn original_from_replay(path: &str) -> Option<&str> {
    let rest = path.strip_prefix("/web/")?;
    let (stamp, original) = rest.split_once('/')?;
    let digits = stamp.trim_end_matches(|c: char| c.is_ascii_alphabetic() || c == '_' || c == '*');
    if digits.is_empty() && !stamp.contains('*') {
        return None;
    }
    (original.starts_with("http://") || original.starts_with("https://")).then_some(original)
}

/// Optional content-language check; returning `Some(false)` drops the URI.
pub trait LanguageCheck: Send + Sync {
    fn is_english(&self, uri: &str) -> Option<bool>;
}

/// Counts of what each rule removed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogFilterStats {
    pub lines: usize,
    pub malformed: usize,
    pub non_200: usize,
    pub invalid_uri: usize,
    pub non_html: usize,
    pub ip_host: usize,
    pub non_english_cctld: usize,
    pub duplicate: usize,
    pub non_english_content: usize,
    pub kept: usize,
}

/// Why a URI was rejected, in rule order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rejection {
    Malformed,
    Non200,
    InvalidUri,
    NonHtml,
    IpHost,
    NonEnglishCcTld,
    Duplicate,
    NonEnglishContent,
}

fn extension_ok(parsed: &ParsedUri) -> bool {
    let last = parsed.path.rsplit('/').next().unwrap_or("");
    match last.rsplit_once('.') {
        None => true,
        Some((_, ext)) => HTML_EXTENSIONS.contains(&ext.to_ascii_lowercase().as_str()),
    }
}

/// Checks a URI against the host/extension rules.
pub fn check_uri(uri: &str) -> Result<ParsedUri, Rejection> {
    let parsed = ParsedUri::parse(uri).map_err(|_| Rejection::InvalidUri)?;
    if !extension_ok(&parsed) {
        return Err(Rejection::NonHtml);
    }
    if parsed.is_ip {
        return Err(Rejection::IpHost);
    }
    let last = parsed.last_label();
    if last.len() == 2
        && last.bytes().all(|b| b.is_ascii_alphabetic())
        && !ENGLISH_CCTLDS.contains(last)
    {
        return Err(Rejection::NonEnglishCcTld);
    }
    Ok(parsed)
}

/// Streaming filter over access-log lines producing unique request URIs.
pub struct LogFilter<'a> {
    seen: HashSet<String>,
    language: Option<&'a dyn LanguageCheck>,
    pub stats: LogFilterStats,
}

impl<'a> Default for LogFilter<'a> {
    fn default() -> Self {
        Self::new(None)
    }
}

impl<'a> LogFilter<'a> {
    pub fn new(language: Option<&'a dyn LanguageCheck>) -> Self {
        Self {
            seen: HashSet::new(),
            language,
            stats: LogFilterStats::default(),
        }
    }

    /// Returns the URI when the line survives every rule.
    pub fn accept_line(&mut self, line: &str) -> Result<String, Rejection> {
        if line.trim().is_empty() {
            return Err(Rejection::Malformed);
        }
        self.stats.lines += 1;
        let outcome = self.judge(line);
        let s = &mut self.stats;
        match outcome {
            Ok(_) => s.kept += 1,
            Err(Rejection::Malformed) => s.malformed += 1,
            Err(Rejection::Non200) => s.non_200 += 1,
            Err(Rejection::InvalidUri) => s.invalid_uri += 1,
            Err(Rejection::NonHtml) => s.non_html += 1,
            Err(Rejection::IpHost) => s.ip_host += 1,
            Err(Rejection::NonEnglishCcTld) => s.non_english_cctld += 1,
            Err(Rejection::Duplicate) => s.duplicate += 1,
            Err(Rejection::NonEnglishContent) => s.non_english_content += 1,
        }
        outcome
    }

    fn judge(&mut self, line: &str) -> Result<String, Rejection> {
        let record = AccessLogRecord::parse(line).ok_or(Rejection::Malformed)?;
        if record.status != 200 {
            return Err(Rejection::Non200);
        }
        let uri = record.requested_uri().to_string();
        check_uri(&uri)?;
        if !self.seen.insert(uri.clone()) {
            return Err(Rejection::Duplicate);
        }
        if let Some(check) = self.language {
            if check.is_english(&uri) == Some(false) {
                return Err(Rejection::NonEnglishContent);
            }
        }
        Ok(uri)
    }
}

/// Filters every line of `reader`, returning survivors in first-seen order.
pub fn filter_access_log<R: BufRead>(
    reader: R,
    language: Option<&dyn LanguageCheck>,
) -> io::Result<(Vec<String>, LogFilterStats)> {
    let mut filter = LogFilter::new(language);
    let mut kept = Vec::new();
    for line in reader.lines() {
        if let Ok(uri) = filter.accept_line(&line?) {
            kept.push(uri);
        }
    }
    Ok((kept, filter.stats))
}

/// Opens a file for line reading, decompressing it when it starts with the gzip magic bytes.
pub fn open_maybe_gzip(path: &Path) -> io::Result<Box<dyn BufRead>> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic)?;
    let file = File::open(path)?;
    if n == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}
