use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::index::CategoryIndex;
use super::ingest::{ingest_dmoz, DmozFormat, IngestOptions};
use super::OntologyError;

pub const ENTRIES_FILE: &str = "entries.tsv";
pub const SURT_FILE: &str = "surt.tsv";

fn clean(s: Option<&str>) -> String {
    s.unwrap_or("").replace(['\t', '\n', '\r'], " ")
}

/// Writes `entries.tsv` (the TSV ingestion format, index order) and a
/// `surt.tsv` sidecar of `surt<TAB>row` lines.
pub fn save_index(index: &CategoryIndex, dir: &Path) -> Result<(), OntologyError> {
    fs::create_dir_all(dir)?;
    let mut entries = BufWriter::new(File::create(dir.join(ENTRIES_FILE))?);
    let mut surts = BufWriter::new(File::create(dir.join(SURT_FILE))?);
    writeln!(entries, "# category\turi\ttitle\tdescription")?;
    for (row, e) in index.entries().iter().enumerate() {
        writeln!(
            entries,
            "{}\t{}\t{}\t{}",
            e.category,
            clean(Some(&e.uri)),
            clean(e.title.as_deref()),
            clean(e.description.as_deref())
        )?;
        writeln!(surts, "{}\t{}", e.surt, row)?;
    }
    entries.flush()?;
    surts.flush()?;
    Ok(())
}

/// Reloads a saved index and checks it against the SURT sidecar.
pub fn load_index(dir: &Path, options: &IngestOptions) -> Result<CategoryIndex, OntologyError> {
    let reader = BufReader::new(File::open(dir.join(ENTRIES_FILE))?);
    let index = ingest_dmoz(reader, DmozFormat::Tsv, options)?;
    let sidecar = BufReader::new(File::open(dir.join(SURT_FILE))?);
    let mut rows = 0usize;
    for line in sidecar.lines() {
        let line = line?;
        let (surt, row) = line
            .split_once('\t')
            .ok_or_else(|| OntologyError::Corrupt(format!("bad sidecar line {line:?}")))?;
        let row: usize = row
            .parse()
            .map_err(|_| OntologyError::Corrupt(format!("bad row in {line:?}")))?;
        match index.entries().get(row) {
            Some(e) if e.surt == surt => {}
            _ => {
                return Err(OntologyError::Corrupt(format!(
                    "sidecar row {row} does not match {surt}"
                )))
            }
        }
        rows += 1;
    }
    if rows != index.len() {
        return Err(OntologyError::Corrupt(format!(
            "sidecar lists {rows} entries, index has {}",
            index.len()
        )));
    }
    Ok(index)
}
