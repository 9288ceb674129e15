//! Versioned text format:
//!
//! ```text
//! lostpage-nb 1
//! method <method>
//! variants <variants>
//! smoothing <alpha>
//! classes <n>
//! class <label>\t<documents>\t<distinct features>
//! <feature>\t<count>        (sorted by feature)
//! ...
//! ```
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use super::model::NaiveBayesModel;
use super::NbError;
use crate::uri::{TokenConfig, TokenMethod, Variants};

const MAGIC: &str = "lostpage-nb 1";

pub fn write_model<W: Write>(model: &NaiveBayesModel, mut out: W) -> Result<(), NbError> {
    let n = model.classes.len();
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "method {}", model.config.method)?;
    writeln!(out, "variants {}", model.config.variants)?;
    writeln!(out, "smoothing {}", model.smoothing)?;
    writeln!(out, "classes {n}")?;
    let mut per_class: Vec<BTreeMap<&str, u64>> = vec![BTreeMap::new(); n];
    for (feature, &row) in &model.vocabulary {
        for (c, map) in per_class.iter_mut().enumerate() {
            let k = model.counts[row * n + c];
            if k > 0 {
                map.insert(feature, k);
            }
        }
    }
    for (c, map) in per_class.iter().enumerate() {
        writeln!(
            out,
            "class {}\t{}\t{}",
            model.classes[c],
            model.doc_counts[c],
            map.len()
        )?;
        for (f, k) in map {
            writeln!(out, "{f}\t{k}")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_model<R: BufRead>(input: R) -> Result<NaiveBayesModel, NbError> {
    let mut lines = input.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String), NbError> {
        match lines.next() {
            Some((i, l)) => Ok((i + 1, l?)),
            None => Err(NbError::Format {
                line: 0,
                detail: format!("unexpected end of file, expected {what}"),
            }),
        }
    };
    let bad = |line: usize, detail: String| NbError::Format { line, detail };
    let field = |(line, text): (usize, String), key: &str| -> Result<(usize, String), NbError> {
        text.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .map(|v| (line, v.to_string()))
            .ok_or_else(|| bad(line, format!("expected `{key} ...`")))
    };

    let (line, magic) = next("header")?;
    if magic != MAGIC {
        return Err(bad(line, format!("unsupported header {magic:?}")));
    }
    let (line, method) = field(next("method")?, "method")?;
    let method: TokenMethod = method
        .parse::<TokenMethod>()
        .map_err(|e| bad(line, e.to_string()))?;
    let (line, variants) = field(next("variants")?, "variants")?;
    let variants: Variants = variants.parse().map_err(|e: String| bad(line, e))?;
    let (line, smoothing) = field(next("smoothing")?, "smoothing")?;
    let smoothing: f64 = smoothing
        .parse()
        .map_err(|_| bad(line, "bad smoothing".into()))?;
    if !(smoothing > 0.0 && smoothing.is_finite()) {
        return Err(NbError::BadSmoothing(smoothing));
    }
    let (line, n) = field(next("classes")?, "classes")?;
    let n: usize = n.parse().map_err(|_| bad(line, "bad class count".into()))?;

    let mut classes = Vec::with_capacity(n);
    let mut doc_counts = Vec::with_capacity(n);
    let mut per_class: Vec<Vec<(String, u64)>> = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, header) = field(next("class")?, "class")?;
        let parts: Vec<&str> = header.split('\t').collect();
        let [label, docs, features] = parts[..] else {
            return Err(bad(
                line,
                "class line needs label, documents, features".into(),
            ));
        };
        let docs: u64 = docs
            .parse()
            .map_err(|_| bad(line, "bad document count".into()))?;
        let features: usize = features
            .parse()
            .map_err(|_| bad(line, "bad feature count".into()))?;
        let mut rows = Vec::with_capacity(features);
        for _ in 0..features {
            let (line, text) = next("feature line")?;
            let (f, k) = text
                .split_once('\t')
                .ok_or_else(|| bad(line, "feature line needs a tab".into()))?;
            let k: u64 = k
                .parse()
                .map_err(|_| bad(line, "bad feature count".into()))?;
            rows.push((f.to_string(), k));
        }
        classes.push(label.to_string());
        doc_counts.push(docs);
        per_class.push(rows);
    }
    if classes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad(0, "classes must be unique and sorted".into()));
    }
    if let Some(c) = doc_counts.iter().position(|&d| d == 0) {
        return Err(NbError::EmptyClass(classes[c].clone()));
    }

    let mut vocabulary: HashMap<String, usize> = HashMap::new();
    let mut counts: Vec<u64> = Vec::new();
    let mut class_totals = vec![0u64; n];
    for (c, rows) in per_class.into_iter().enumerate() {
        for (f, k) in rows {
            let next_row = vocabulary.len();
            let row = *vocabulary.entry(f).or_insert_with(|| {
                counts.extend(std::iter::repeat_n(0, n));
                next_row
            });
            counts[row * n + c] += k;
            class_totals[c] += k;
        }
    }
    Ok(NaiveBayesModel::from_counts(
        TokenConfig::new(method, variants),
        smoothing,
        classes,
        doc_counts,
        vocabulary,
        counts,
        class_totals,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uri::TokenBag;

    #[test]
    fn round_trip_is_byte_stable() {
        let cfg = TokenConfig::first_level_default();
        let docs = [
            (
                TokenBag::new(cfg, vec!["abcd".into(), "abcd".into(), "bcde".into()]),
                "Arts",
            ),
            (TokenBag::new(cfg, vec!["wxyz".into()]), "Science"),
        ];
        let m = NaiveBayesModel::train(docs.iter().map(|(b, l)| (b, *l)), 1.0).unwrap();
        let mut a = Vec::new();
        write_model(&m, &mut a).unwrap();
        let back = read_model(a.as_slice()).unwrap();
        let mut b = Vec::new();
        write_model(&back, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with(
            "lostpage-nb 1\nmethod all-grams-uri\nvariants strip-tld,strip-numbers\n"
        ));
        assert!(text.contains("class Arts\t1\t2\nabcd\t2\nbcde\t1\n"));
        assert_eq!(back.classes(), m.classes());
        for f in ["abcd", "bcde", "wxyz", "none"] {
            for c in 0..2 {
                assert_eq!(
                    back.feature_log_likelihood(f, c),
                    m.feature_log_likelihood(f, c)
                );
            }
        }
    }

    #[test]
    fn rejects_bad_header() {
        assert!(matches!(
            read_model("nope\n".as_bytes()),
            Err(NbError::Format { line: 1, .. })
        ));
    }
}
