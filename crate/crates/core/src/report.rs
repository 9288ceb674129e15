//! Descriptive statistics over a set of URIs: TLD and depth distributions,
//! pattern frequencies, dictionary-word coverage and per-category counts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::ontology::CategoryIndex;
use crate::uri::{
    depth_of, detect_patterns_parsed, segment_words, strip_www, Location, ParsedUri, Pattern,
    WordLexicon,
};

/// Depth buckets used in the distribution tables; the last one is open-ended.
pub const DEPTH_BUCKETS: [&str; 4] = ["0", "1", "2", "3+"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub label: String,
    pub count: usize,
}

/// Occurrences of one pattern; `None` where the pattern is undefined for a location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternRow {
    pub pattern: Pattern,
    pub hostname: Option<usize>,
    pub path: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub label: String,
    pub entries: usize,
    /// Distinct category paths below the top-level label.
    pub subcategories: usize,
}

/// How a URI's words relate to the lexicon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryWords {
    /// Every segmented piece is a lexicon word (and there is at least one piece).
    pub only_dictionary: bool,
    /// At least one piece is a lexicon word.
    pub any_dictionary: bool,
}

/// Splits the host (TLD and `www` removed) and path into alphabetic runs,
/// segments each run and checks the pieces against `lexicon`.
pub fn dictionary_words(parsed: &ParsedUri, lexicon: &WordLexicon) -> DictionaryWords {
    let host = strip_www(parsed.host_without_tld());
    let host = if parsed.is_ip { "" } else { host };
    let text = format!("{host}/{}", parsed.path).to_lowercase();
    let mut pieces = 0usize;
    let mut known = 0usize;
    for run in text
        .split(|c: char| !c.is_ascii_alphabetic())
        .filter(|r| !r.is_empty())
    {
        for seg in segment_words(run, lexicon) {
            pieces += 1;
            known += usize::from(seg.in_lexicon);
        }
    }
    DictionaryWords {
        only_dictionary: pieces > 0 && known == pieces,
        any_dictionary: known > 0,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UriReport {
    /// URIs that parsed and were counted.
    pub total: usize,
    /// Inputs that did not parse.
    pub invalid: usize,
    /// By last host label, descending count then label. IP hosts are listed as `(ip)`.
    pub tlds: Vec<CountRow>,
    pub depths: Vec<CountRow>,
    pub patterns: Vec<PatternRow>,
    pub dictionary_only: usize,
    pub dictionary_any: usize,
    /// Empty unless built from a category index.
    pub categories: Vec<CategoryRow>,
}

/// Streaming accumulator behind [`UriReport`].
#[derive(Debug)]
pub struct ReportBuilder<'a> {
    lexicon: &'a WordLexicon,
    total: usize,
    invalid: usize,
    tlds: BTreeMap<String, usize>,
    depths: [usize; 4],
    host_hits: BTreeMap<Pattern, usize>,
    path_hits: BTreeMap<Pattern, usize>,
    dictionary_only: usize,
    dictionary_any: usize,
}

impl<'a> ReportBuilder<'a> {
    pub fn new(lexicon: &'a WordLexicon) -> Self {
        Self {
            lexicon,
            total: 0,
            invalid: 0,
            tlds: BTreeMap::new(),
            depths: [0; 4],
            host_hits: BTreeMap::new(),
            path_hits: BTreeMap::new(),
            dictionary_only: 0,
            dictionary_any: 0,
        }
    }

    pub fn add(&mut self, uri: &str) {
        match ParsedUri::parse(uri) {
            Ok(parsed) => self.add_parsed(uri, &parsed),
            Err(_) => self.invalid += 1,
        }
    }

    pub fn add_parsed(&mut self, raw: &str, parsed: &ParsedUri) {
        self.total += 1;
        let tld = if parsed.is_ip {
            "(ip)"
        } else {
            parsed.last_label()
        };
        *self.tlds.entry(tld.to_string()).or_default() += 1;
        self.depths[depth_of(parsed).min(3)] += 1;

        let report = detect_patterns_parsed(raw, parsed);
        for pattern in Pattern::ALL {
            if report.get(pattern, Location::Hostname) == Some(true) {
                *self.host_hits.entry(pattern).or_default() += 1;
            }
            if report.get(pattern, Location::Path) == Some(true) {
                *self.path_hits.entry(pattern).or_default() += 1;
            }
        }

        let words = dictionary_words(parsed, self.lexicon);
        self.dictionary_only += usize::from(words.only_dictionary);
        self.dictionary_any += usize::from(words.any_dictionary);
    }

    pub fn finish(self) -> UriReport {
        let mut tlds: Vec<CountRow> = self
            .tlds
            .into_iter()
            .map(|(label, count)| CountRow { label, count })
            .collect();
        tlds.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.label.cmp(&b.label)));
        let depths = DEPTH_BUCKETS
            .iter()
            .zip(self.depths)
            .map(|(label, count)| CountRow {
                label: label.to_string(),
                count,
            })
            .collect();
        let patterns = Pattern::ALL
            .iter()
            .map(|&pattern| {
                let count = |loc, hits: &BTreeMap<Pattern, usize>| {
                    probe(pattern, loc).then(|| hits.get(&pattern).copied().unwrap_or(0))
                };
                PatternRow {
                    pattern,
                    hostname: count(Location::Hostname, &self.host_hits),
                    path: count(Location::Path, &self.path_hits),
                }
            })
            .collect();
        UriReport {
            total: self.total,
            invalid: self.invalid,
            tlds,
            depths,
            patterns,
            dictionary_only: self.dictionary_only,
            dictionary_any: self.dictionary_any,
            categories: Vec::new(),
        }
    }
}

/// Whether `pattern` is defined for `location`.
fn probe(pattern: Pattern, location: Location) -> bool {
    crate::uri::UriPatternReport::default()
        .get(pattern, location)
        .is_some()
}

/// Report over arbitrary URIs; unparseable inputs are counted as invalid.
pub fn analyze_uris<I, S>(uris: I, lexicon: &WordLexicon) -> UriReport
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut builder = ReportBuilder::new(lexicon);
    for uri in uris {
        builder.add(uri.as_ref());
    }
    builder.finish()
}

/// Report over every entry of an index, with per-top-level category rows.
pub fn corpus_stats(index: &CategoryIndex, lexicon: &WordLexicon) -> UriReport {
    let mut report = analyze_uris(index.entries().iter().map(|e| e.uri.as_str()), lexicon);
    let mut rows: BTreeMap<&str, (usize, BTreeSet<&crate::ontology::CategoryPath>)> =
        BTreeMap::new();
    for category in index.categories() {
        let row = rows.entry(category.top()).or_default();
        row.0 += index.entries_in(category).count();
        if category.len() > 1 {
            row.1.insert(category);
        }
    }
    report.categories = rows
        .into_iter()
        .map(|(label, (entries, subs))| CategoryRow {
            label: label.to_string(),
            entries,
            subcategories: subs.len(),
        })
        .collect();
    report.categories.sort_by(|a, b| {
        b.entries
            .cmp(&a.entries)
            .then_with(|| a.label.cmp(&b.label))
    });
    report
}

impl UriReport {
    /// `count` as a percentage of the counted URIs; 0 when nothing was counted.
    pub fn percent(&self, count: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * count as f64 / self.total as f64
        }
    }

    pub fn depth_count(&self, label: &str) -> usize {
        self.depths
            .iter()
            .find(|r| r.label == label)
            .map_or(0, |r| r.count)
    }

    pub fn tld_count(&self, label: &str) -> usize {
        self.tlds
            .iter()
            .find(|r| r.label == label)
            .map_or(0, |r| r.count)
    }

    pub fn pattern(&self, pattern: Pattern) -> Option<&PatternRow> {
        self.patterns.iter().find(|r| r.pattern == pattern)
    }
}

impl fmt::Display for UriReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(
            out,
            "URIs counted: {} (unparseable: {})",
            self.total, self.invalid
        )?;
        writeln!(out, "\nTLD\tcount\tpercent")?;
        for row in &self.tlds {
            writeln!(
                out,
                "{}\t{}\t{:.2}%",
                row.label,
                row.count,
                self.percent(row.count)
            )?;
        }
        writeln!(out, "\ndepth\tcount\tpercent")?;
        for row in &self.depths {
            writeln!(
                out,
                "{}\t{}\t{:.2}%",
                row.label,
                row.count,
                self.percent(row.count)
            )?;
        }
        writeln!(out, "\npattern\thostname\tpath")?;
        let cell = |c: Option<usize>| {
            c.map_or_else(|| "-".to_string(), |n| format!("{:.2}%", self.percent(n)))
        };
        for row in &self.patterns {
            writeln!(
                out,
                "{}\t{}\t{}",
                row.pattern,
                cell(row.hostname),
                cell(row.path)
            )?;
        }
        writeln!(out, "\ndictionary words\tcount\tpercent")?;
        writeln!(
            out,
            "only\t{}\t{:.2}%",
            self.dictionary_only,
            self.percent(self.dictionary_only)
        )?;
        writeln!(
            out,
            "at least one\t{}\t{:.2}%",
            self.dictionary_any,
            self.percent(self.dictionary_any)
        )?;
        if !self.categories.is_empty() {
            writeln!(out, "\ncategory\tentries\tsubcategories\tpercent")?;
            for row in &self.categories {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{:.2}%",
                    row.label,
                    row.entries,
                    row.subcategories,
                    self.percent(row.entries)
                )?;
            }
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{ingest_dmoz, DmozFormat, IngestOptions};

    fn lexicon() -> WordLexicon {
        WordLexicon::from_ranked([
            "baseball", "cards", "mickey", "mantle", "radio", "news", "sports",
        ])
    }

    #[test]
    fn three_com_roots() {
        let r = analyze_uris(
            ["http://a.com/", "http://b.com", "http://c.com/index.html"],
            &lexicon(),
        );
        assert_eq!(r.total, 3);
        assert_eq!(
            r.tlds,
            vec![CountRow {
                label: "com".into(),
                count: 3
            }]
        );
        assert_eq!(r.percent(r.tld_count("com")), 100.0);
        assert_eq!(r.percent(r.depth_count("0")), 100.0);
    }

    #[test]
    fn ten_entries_four_at_depth_one() {
        let uris = [
            "http://a.com/",
            "http://b.com/x",
            "http://c.com/y",
            "http://d.org/z/",
            "http://e.net/w",
            "http://f.com/a/b",
            "http://g.com/a/b/c",
            "http://h.com/a/b/c/d",
            "http://i.com/",
            "http://j.com/index.html",
        ];
        let r = analyze_uris(uris, &lexicon());
        assert_eq!(r.depth_count("1"), 4);
        assert!((r.percent(r.depth_count("1")) - 40.0).abs() < 1e-12);
        assert_eq!(r.depth_count("3+"), 2);
        let sum: usize = r.depths.iter().map(|d| d.count).sum();
        assert_eq!(sum, r.total);
    }

    #[test]
    fn dictionary_coverage() {
        let lex = lexicon();
        let uris = [
            "http://mickeymantlebaseballcards.net",
            "http://www.radioxq.com",
            "http://odu.edu",
            "http://qzx.org/news",
        ];
        let r = analyze_uris(uris, &lex);
        assert_eq!(r.dictionary_only, 1);
        assert!((r.percent(r.dictionary_only) - 25.0).abs() < 1e-12);
        assert_eq!(r.dictionary_any, 3);
    }

    #[test]
    fn pattern_rows_follow_location_rules() {
        let r = analyze_uris(
            ["http://63.135.118.69/a?x=1", "http://radiotunis.com"],
            &lexicon(),
        );
        let ip = r.pattern(Pattern::IpAddress).unwrap();
        assert_eq!((ip.hostname, ip.path), (Some(1), None));
        let q = r.pattern(Pattern::Query).unwrap();
        assert_eq!((q.hostname, q.path), (None, Some(1)));
        assert_eq!(r.pattern(Pattern::LongStrings).unwrap().hostname, Some(1));
        assert_eq!(r.tld_count("(ip)"), 1);
    }

    #[test]
    fn category_rows_sum_to_total() {
        let text = "Arts/Music\thttp://a.com/\t\t\nArts/Film/Noir\thttp://b.com/\t\t\nArts\thttp://c.com/\t\t\nScience\thttp://d.org/\t\t\n";
        let idx = ingest_dmoz(text.as_bytes(), DmozFormat::Tsv, &IngestOptions::default()).unwrap();
        let r = corpus_stats(&idx, &lexicon());
        assert_eq!(
            r.categories[0],
            CategoryRow {
                label: "Arts".into(),
                entries: 3,
                subcategories: 2
            }
        );
        let sum: usize = r.categories.iter().map(|c| c.entries).sum();
        assert_eq!(sum, r.total);
        let pct: f64 = r.tlds.iter().map(|t| r.percent(t.count)).sum();
        assert!((pct - 100.0).abs() < 1e-9);
        assert!(r.to_string().contains("Arts\t3\t2\t75.00%"));
    }
}
