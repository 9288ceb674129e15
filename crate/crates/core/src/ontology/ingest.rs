use std::collections::BTreeSet;
use std::io::BufRead;

use log::warn;
use quick_xml::events::Event;
use quick_xml::Reader;

use super::category::CategoryPath;
use super::index::{CategoryIndex, OntologyEntry};
use super::OntologyError;

/// Top-level categories removed before indexing.
pub const EXCLUDED_TOP_LEVEL: [&str; 5] =
    ["World", "Regional", "Netscape", "Kids_and_Teens", "Adult"];

/// The thirteen English top-level categories that remain after exclusion.
pub const RETAINED_TOP_LEVEL: [&str; 13] = [
    "Arts",
    "Business",
    "Computers",
    "Games",
    "Health",
    "Home",
    "News",
    "Recreation",
    "Reference",
    "Science",
    "Shopping",
    "Society",
    "Sports",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmozFormat {
    /// `content.rdf.u8` style: `ExternalPage about=...` with `topic`, `d:Title`, `d:Description`.
    Rdf,
    /// `category<TAB>uri<TAB>title<TAB>description`, `#` comments.
    Tsv,
}

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub excluded_top: BTreeSet<String>,
    /// When set, only these top-level labels are kept.
    pub allowed_top: Option<BTreeSet<String>>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            excluded_top: EXCLUDED_TOP_LEVEL.iter().map(|s| s.to_string()).collect(),
            allowed_top: Some(RETAINED_TOP_LEVEL.iter().map(|s| s.to_string()).collect()),
        }
    }
}

impl IngestOptions {
    /// Keeps every top-level label except the excluded ones.
    pub fn any_top_level() -> Self {
        Self {
            allowed_top: None,
            ..Self::default()
        }
    }

    fn keeps(&self, top: &str) -> bool {
        !self.excluded_top.contains(top)
            && self
                .allowed_top
                .as_ref()
                .is_none_or(|allowed| allowed.contains(top))
    }
}

/// A record before validation.
struct RawRecord {
    category: Option<String>,
    uri: Option<String>,
    title: Option<String>,
    description: Option<String>,
}

pub fn ingest_dmoz<R: BufRead>(
    source: R,
    format: DmozFormat,
    options: &IngestOptions,
) -> Result<CategoryIndex, OntologyError> {
    let mut index = CategoryIndex::default();
    let sink = |rec: Option<RawRecord>, index: &mut CategoryIndex| {
        index.report_mut().records_seen += 1;
        match rec {
            Some(rec) => admit(index, rec, options),
            None => index.report_mut().malformed += 1,
        }
    };
    match format {
        DmozFormat::Tsv => read_tsv(source, |rec| sink(rec, &mut index))?,
        DmozFormat::Rdf => read_rdf(source, |rec| sink(rec, &mut index))?,
    }
    let r = index.report();
    if r.malformed > 0 {
        warn!("skipped {} malformed ontology records", r.malformed);
    }
    Ok(index)
}

fn admit(index: &mut CategoryIndex, rec: RawRecord, options: &IngestOptions) {
    let (Some(cat), Some(uri)) = (
        rec.category.filter(|c| !c.trim().is_empty()),
        rec.uri.filter(|u| !u.trim().is_empty()),
    ) else {
        index.report_mut().missing_fields += 1;
        return;
    };
    let Ok(category) = CategoryPath::parse(&cat) else {
        index.report_mut().missing_fields += 1;
        return;
    };
    if !options.keeps(category.top()) {
        index.report_mut().excluded_category += 1;
        return;
    }
    match OntologyEntry::new(category, &uri, rec.title, rec.description) {
        Ok(entry) => {
            index.insert(entry);
        }
        Err(e) => {
            warn!("skipping ontology record: {e}");
            index.report_mut().malformed += 1;
        }
    }
}

fn read_tsv<R: BufRead>(
    mut source: R,
    mut emit: impl FnMut(Option<RawRecord>),
) -> Result<(), OntologyError> {
    let mut buf = Vec::new();
    let mut line_no = 0usize;
    loop {
        buf.clear();
        let n = source.read_until(b'\n', &mut buf)?;
        if n == 0 {
            return Ok(());
        }
        line_no += 1;
        if buf.last() != Some(&b'\n') {
            return Err(OntologyError::Truncated {
                detail: format!("line {line_no} is not LF-terminated"),
            });
        }
        buf.pop();
        if buf.last() == Some(&b'\r') {
            buf.pop();
        }
        let Ok(line) = std::str::from_utf8(&buf) else {
            emit(None);
            continue;
        };
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields.len() > 4 {
            emit(None);
            continue;
        }
        let opt = |i: usize| {
            fields
                .get(i)
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
        };
        emit(Some(RawRecord {
            category: opt(0),
            uri: opt(1),
            title: opt(2),
            description: opt(3),
        }));
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    None,
    Topic,
    Title,
    Description,
}

fn read_rdf<R: BufRead>(
    source: R,
    mut emit: impl FnMut(Option<RawRecord>),
) -> Result<(), OntologyError> {
    let mut reader = Reader::from_reader(source);
    let mut buf = Vec::new();
    let mut current: Option<RawRecord> = None;
    let mut field = Field::None;
    let mut text = String::new();

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| OntologyError::Xml {
                position: reader.buffer_position(),
                detail: e.to_string(),
            })?;
        match event {
            Event::Start(e) => match e.local_name().as_ref() {
                b"ExternalPage" => {
                    let about = e
                        .try_get_attribute("about")
                        .ok()
                        .flatten()
                        .and_then(|a| a.unescape_value().ok().map(|v| v.into_owned()));
                    current = Some(RawRecord {
                        category: None,
                        uri: about,
                        title: None,
                        description: None,
                    });
                }
                name if current.is_some() => {
                    field = match name {
                        b"topic" => Field::Topic,
                        b"Title" => Field::Title,
                        b"Description" => Field::Description,
                        _ => Field::None,
                    };
                    text.clear();
                }
                _ => {}
            },
            Event::Empty(e) if e.local_name().as_ref() == b"ExternalPage" => {
                let about = e
                    .try_get_attribute("about")
                    .ok()
                    .flatten()
                    .and_then(|a| a.unescape_value().ok().map(|v| v.into_owned()));
                emit(Some(RawRecord {
                    category: None,
                    uri: about,
                    title: None,
                    description: None,
                }));
            }
            Event::Text(t) if field != Field::None => match t.unescape() {
                Ok(s) => text.push_str(&s),
                Err(_) => text.push_str(&String::from_utf8_lossy(&t)),
            },
            Event::CData(t) if field != Field::None => text.push_str(&String::from_utf8_lossy(&t)),
            Event::End(e) => {
                let name = e.local_name();
                if name.as_ref() == b"ExternalPage" {
                    if let Some(rec) = current.take() {
                        emit(Some(rec));
                    }
                    field = Field::None;
                } else if let Some(rec) = current.as_mut() {
                    let value = Some(text.trim().to_string()).filter(|s| !s.is_empty());
                    match field {
                        Field::Topic => rec.category = value,
                        Field::Title => rec.title = value,
                        Field::Description => rec.description = value,
                        Field::None => {}
                    }
                    field = Field::None;
                    text.clear();
                }
            }
            Event::Eof => {
                if current.is_some() {
                    return Err(OntologyError::Truncated {
                        detail: "end of input inside an ExternalPage element".into(),
                    });
                }
                return Ok(());
            }
            _ => {}
        }
        buf.clear();
    }
}
