use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Genre, RawDocument};
use crate::error::{Error, Result};

const YEAR_RANGE: std::ops::RangeInclusive<i32> = 1700..=1899;

/// Per-record ingestion failure. The record is skipped but always reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordError {
    pub line: usize,
    pub doc_id: Option<String>,
    pub reason: String,
}

/// Summary written next to every index build.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    /// Non-blank lines read.
    pub read: usize,
    pub accepted: usize,
    /// Well-formed records excluded by the genre filter.
    pub filtered_by_genre: usize,
    pub errors: Vec<RecordError>,
    pub warnings: Vec<String>,
}

/// Read a JSON Lines corpus from `path`.
///
/// An unreadable file is fatal; malformed records land in the report.
pub fn ingest_corpus(
    path: impl AsRef<Path>,
    genre_filter: Option<Genre>,
) -> Result<(Vec<RawDocument>, IngestReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(BufReader::new(file), genre_filter).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn ingest_reader<R: BufRead>(
    reader: R,
    genre_filter: Option<Genre>,
) -> Result<(Vec<RawDocument>, IngestReport)> {
    let mut docs = Vec::new();
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        report.read += 1;
        let doc = match parse_record(&line) {
            Ok(doc) => doc,
            Err((doc_id, reason)) => {
                report.errors.push(RecordError {
                    line: lineno,
                    doc_id,
                    reason,
                });
                continue;
            }
        };
        if !seen.insert(doc.doc_id.clone()) {
            report.errors.push(RecordError {
                line: lineno,
                doc_id: Some(doc.doc_id),
                reason: "duplicate doc_id".into(),
            });
            continue;
        }
        if let Some(year) = doc.year {
            if !YEAR_RANGE.contains(&year) {
                report
                    .warnings
                    .push(format!("line {lineno}: {} has year {year} outside 1700-1899", doc.doc_id));
            }
        }
        if genre_filter.is_some_and(|g| g != doc.genre) {
            report.filtered_by_genre += 1;
            continue;
        }
        report.accepted += 1;
        docs.push(doc);
    }
    Ok((docs, report))
}

fn parse_record(line: &str) -> std::result::Result<RawDocument, (Option<String>, String)> {
    let value: Value = serde_json::from_str(line).map_err(|e| (None, format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or((None, "record is not a JSON object".to_string()))?;

    let doc_id = match obj.get("doc_id") {
        Some(Value::String(s)) if !s.trim().is_empty() => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => return Err((None, "missing doc_id".into())),
    };
    let fail = |reason: String| (Some(doc_id.clone()), reason);

    let text = match obj.get("text") {
        Some(Value::String(s)) => s.clone(),
        _ => return Err(fail("missing text".into())),
    };
    let genre = match obj.get("genre") {
        Some(Value::String(s)) => s.parse::<Genre>().map_err(fail)?,
        _ => return Err(fail("missing genre".into())),
    };
    let title = match obj.get("title") {
        Some(Value::String(s)) => s.clone(),
        _ => String::new(),
    };
    let author = match obj.get("author") {
        Some(Value::String(s)) => Some(s.clone()),
        _ => None,
    };
    let year = match obj.get("year") {
        None | Some(Value::Null) => None,
        Some(Value::Number(n)) => Some(
            n.as_i64()
                .and_then(|y| i32::try_from(y).ok())
                .ok_or_else(|| fail(format!("year {n} is not an integer")))?,
        ),
        Some(Value::String(s)) => Some(s.trim().parse().map_err(|_| fail(format!("year {s:?} is not an integer")))?),
        Some(other) => return Err(fail(format!("year {other} is not an integer"))),
    };

    Ok(RawDocument {
        doc_id,
        title,
        author,
        year,
        genre,
        text,
    })
}
