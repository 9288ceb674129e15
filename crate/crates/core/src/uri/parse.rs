use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::{Host, Url};

use super::suffix::SuffixList;

/// The part of a URI that failed to parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UriComponent {
    Scheme,
    Host,
    Port,
    Syntax,
}

impl fmt::Display for UriComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            UriComponent::Scheme => "scheme",
            UriComponent::Host => "host",
            UriComponent::Port => "port",
            UriComponent::Syntax => "syntax",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed URI {input:?}: bad {component} ({detail})")]
pub struct UriError {
    pub input: String,
    pub component: UriComponent,
    pub detail: String,
}

impl UriError {
    fn new(input: &str, component: UriComponent, detail: impl Into<String>) -> Self {
        Self {
            input: input.to_string(),
            component,
            detail: detail.into(),
        }
    }
}

/// An absolute http(s) URI split into the pieces the rest of the crate needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedUri {
    pub scheme: String,
    /// Lowercase, never empty.
    pub host: String,
    /// Explicit non-default port.
    pub port: Option<u16>,
    pub path: String,
    pub query: Option<String>,
    /// Host label directly above the effective TLD plus the TLD, e.g. `bbc.co.uk`.
    /// Equal to the host for IP literals.
    pub registered_domain: String,
    /// Effective TLD from the public-suffix list, e.g. `co.uk`. Empty for IP literals.
    pub tld: String,
    pub is_ip: bool,
}

impl ParsedUri {
    /// Parses with the bundled public-suffix snapshot.
    pub fn parse(input: &str) -> Result<Self, UriError> {
        Self::parse_with(input, SuffixList::bundled())
    }

    pub fn parse_with(input: &str, suffixes: &SuffixList) -> Result<Self, UriError> {
        let trimmed = input.trim();
        if trimmed.is_empty() {
            return Err(UriError::new(input, UriComponent::Syntax, "empty input"));
        }
        let url = Url::parse(trimmed).map_err(|e| {
            let component = match e {
                url::ParseError::EmptyHost
                | url::ParseError::IdnaError
                | url::ParseError::InvalidIpv4Address
                | url::ParseError::InvalidIpv6Address
                | url::ParseError::InvalidDomainCharacter => UriComponent::Host,
                url::ParseError::InvalidPort => UriComponent::Port,
                url::ParseError::RelativeUrlWithoutBase => UriComponent::Scheme,
                _ => UriComponent::Syntax,
            };
            UriError::new(input, component, e.to_string())
        })?;

        let scheme = url.scheme().to_ascii_lowercase();
        if scheme != "http" && scheme != "https" {
            return Err(UriError::new(
                input,
                UriComponent::Scheme,
                format!("unsupported scheme {scheme:?}"),
            ));
        }
        let (host, is_ip) = match url.host() {
            Some(Host::Domain(d)) => (d.trim_end_matches('.').to_ascii_lowercase(), false),
            Some(Host::Ipv4(ip)) => (ip.to_string(), true),
            Some(Host::Ipv6(ip)) => (format!("[{ip}]"), true),
            None => return Err(UriError::new(input, UriComponent::Host, "missing host")),
        };
        if host.is_empty() {
            return Err(UriError::new(input, UriComponent::Host, "empty host"));
        }
        if !is_ip && host.split('.').any(str::is_empty) {
            return Err(UriError::new(input, UriComponent::Host, "empty host label"));
        }

        let (registered_domain, tld) = if is_ip {
            (host.clone(), String::new())
        } else {
            let tld = suffixes.effective_tld(&host);
            (registered_domain_of(&host, &tld), tld)
        };

        Ok(Self {
            scheme,
            host,
            port: url.port(),
            path: url.path().to_string(),
            query: url.query().map(str::to_string),
            registered_domain,
            tld,
            is_ip,
        })
    }

    /// Host with the effective TLD (and its joining dot) removed.
    pub fn host_without_tld(&self) -> &str {
        if self.tld.is_empty() || self.tld.len() >= self.host.len() {
            return &self.host;
        }
        let cut = self.host.len() - self.tld.len();
        self.host[..cut].trim_end_matches('.')
    }

    /// Last DNS label, the unit used for TLD distribution tables.
    pub fn last_label(&self) -> &str {
        if self.is_ip {
            return "";
        }
        self.host.rsplit('.').next().unwrap_or("")
    }

    /// Everything after the authority: path plus `?query` when present.
    pub fn path_and_query(&self) -> String {
        match &self.query {
            Some(q) => format!("{}?{}", self.path, q),
            None => self.path.clone(),
        }
    }
}

impl fmt::Display for ParsedUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}://{}", self.scheme, self.host)?;
        if let Some(port) = self.port {
            write!(f, ":{port}")?;
        }
        f.write_str(&self.path)?;
        if let Some(q) = &self.query {
            write!(f, "?{q}")?;
        }
        Ok(())
    }
}

fn registered_domain_of(host: &str, tld: &str) -> String {
    if tld.is_empty() || host == tld {
        return host.to_string();
    }
    let rest = host[..host.len() - tld.len()].trim_end_matches('.');
    match rest.rsplit('.').next() {
        Some(label) if !label.is_empty() => format!("{label}.{tld}"),
        _ => host.to_string(),
    }
}

/// SURT form of an http(s) URI: scheme dropped, lowercase, `www` prefix removed,
/// host labels reversed and comma-joined, then `)` and the path.
///
/// Query arguments are sorted and empty queries dropped; fragments are removed.
/// IP hosts are kept in their dotted form.
pub fn canonicalize_surt(uri: &str) -> Result<String, UriError> {
    let parsed = ParsedUri::parse(uri)?;
    Ok(surt_of(&parsed))
}

pub(crate) fn surt_of(parsed: &ParsedUri) -> String {
    let host = strip_www(&parsed.host);
    let mut out = if parsed.is_ip {
        host.to_string()
    } else {
        host.split('.').rev().collect::<Vec<_>>().join(",")
    };
    if let Some(port) = parsed.port {
        out.push(':');
        out.push_str(&port.to_string());
    }
    out.push(')');
    let path = if parsed.path.is_empty() {
        "/"
    } else {
        &parsed.path
    };
    out.push_str(&path.to_lowercase());
    if let Some(q) = parsed.query.as_deref().filter(|q| !q.is_empty()) {
        let mut args: Vec<String> = q
            .split('&')
            .filter(|a| !a.is_empty())
            .map(str::to_lowercase)
            .collect();
        args.sort();
        if !args.is_empty() {
            out.push('?');
            out.push_str(&args.join("&"));
        }
    }
    out
}

/// Drops a leading `www.`, `www1.`, `www2.` ... label when something remains after it.
pub(crate) fn strip_www(host: &str) -> &str {
    if let Some((first, rest)) = host.split_once('.') {
        if let Some(digits) = first.strip_prefix("www") {
            if digits.bytes().all(|b| b.is_ascii_digit()) && rest.contains('.') {
                return rest;
            }
        }
    }
    host
}

/// Rebuilds an `http://` URI from a SURT string produced by [`canonicalize_surt`].
pub fn surt_to_uri(surt: &str) -> Option<String> {
    let (authority, rest) = surt.split_once(')')?;
    let (hosts, port) = match authority.rsplit_once(':') {
        Some((h, p)) if p.bytes().all(|b| b.is_ascii_digit()) && !p.is_empty() => (h, Some(p)),
        _ => (authority, None),
    };
    let host = if hosts.contains(',') || !hosts.contains('.') {
        hosts.split(',').rev().collect::<Vec<_>>().join(".")
    } else {
        hosts.to_string()
    };
    let mut out = format!("http://{host}");
    if let Some(p) = port {
        out.push(':');
        out.push_str(p);
    }
    out.push_str(if rest.is_empty() { "/" } else { rest });
    Some(out)
}

/// Number of non-empty path segments after canonicalization. A trailing
/// `index.html` or `home.html` segment is not counted.
pub fn depth(uri: &str) -> Result<usize, UriError> {
    let parsed = ParsedUri::parse(uri)?;
    Ok(depth_of(&parsed))
}

pub(crate) fn depth_of(parsed: &ParsedUri) -> usize {
    let lowered = parsed.path.to_lowercase();
    let mut segments: Vec<&str> = lowered.split('/').filter(|s| !s.is_empty()).collect();
    if matches!(segments.last(), Some(&"index.html") | Some(&"home.html")) {
        segments.pop();
    }
    segments.len()
}
