//! TREC qrels and run files.
//!
//! Qrels: `qid 0 passage_id grade`, grade in 0..=4.
//! Runs: `qid Q0 passage_id rank score run_tag`, scores with 6 decimals.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::retrieval::ScoredHit;

pub const MAX_GRADE: u8 = 4;

/// Graded judgments, `qid → passage_id → grade`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QrelSet {
    pub judgments: BTreeMap<String, BTreeMap<String, u8>>,
}

impl QrelSet {
    pub fn insert(&mut self, qid: &str, passage_id: &str, grade: u8) -> Result<()> {
        if grade > MAX_GRADE {
            return Err(Error::InvalidParam(format!("grade {grade} outside 0-{MAX_GRADE}")));
        }
        match self
            .judgments
            .entry(qid.to_owned())
            .or_default()
            .entry(passage_id.to_owned())
        {
            Entry::Occupied(_) => Err(Error::InvalidParam(format!("duplicate judgment ({qid}, {passage_id})"))),
            Entry::Vacant(v) => {
                v.insert(grade);
                Ok(())
            }
        }
    }

    pub fn grade(&self, qid: &str, passage_id: &str) -> Option<u8> {
        self.judgments.get(qid)?.get(passage_id).copied()
    }

    pub fn for_query(&self, qid: &str) -> Option<&BTreeMap<String, u8>> {
        self.judgments.get(qid)
    }

    pub fn qids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (qid, docs) in &self.judgments {
            for (pid, grade) in docs {
                writeln!(out, "{qid} 0 {pid} {grade}")?;
            }
        }
        Ok(())
    }

    pub fn to_trec_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to Vec");
        String::from_utf8(buf).expect("qrels are UTF-8")
    }
}

/// Ranked output of one system, `qid → hits` in rank order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunFile {
    pub run_tag: String,
    pub runs: BTreeMap<String, Vec<ScoredHit>>,
}

impl RunFile {
    pub fn new(run_tag: impl Into<String>) -> Self {
        Self {
            run_tag: run_tag.into(),
            runs: BTreeMap::new(),
        }
    }

    pub fn hits(&self, qid: &str) -> &[ScoredHit] {
        self.runs.get(qid).map_or(&[], Vec::as_slice)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (qid, hits) in &self.runs {
            for h in hits {
                writeln!(out, "{qid} Q0 {} {} {:.6} {}", h.passage_id, h.rank, h.score, self.run_tag)?;
            }
        }
        Ok(())
    }

    pub fn to_trec_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to Vec");
        String::from_utf8(buf).expect("runs are UTF-8")
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn load_qrels(path: impl AsRef<Path>) -> Result<QrelSet> {
    let path = path.as_ref();
    parse_qrels(open(path)?, &path.display().to_string())
}

pub fn parse_qrels<R: BufRead>(reader: R, name: &str) -> Result<QrelSet> {
    let mut qrels = QrelSet::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(name, e))?;
        let lineno = i + 1;
        let err = |reason: String| Error::Parse {
            file: name.to_owned(),
            line: lineno,
            reason,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => continue,
            [qid, _iter, pid, grade] => {
                let grade: i64 = grade.parse().map_err(|_| err(format!("grade {grade:?} is not an integer")))?;
                if !(0..=i64::from(MAX_GRADE)).contains(&grade) {
                    return Err(err(format!("grade {grade} outside 0-{MAX_GRADE}")));
                }
                qrels
                    .insert(qid, pid, grade as u8)
                    .map_err(|_| err(format!("duplicate judgment for ({qid}, {pid})")))?;
            }
            other => return Err(err(format!("expected 4 fields, found {}", other.len()))),
        }
    }
    Ok(qrels)
}

pub fn load_run(path: impl AsRef<Path>) -> Result<RunFile> {
    let path = path.as_ref();
    parse_run(open(path)?, &path.display().to_string())
}

pub fn parse_run<R: BufRead>(reader: R, name: &str) -> Result<RunFile> {
    // (line, hit) per qid, validated once all lines are in.
    let mut raw: BTreeMap<String, Vec<(usize, ScoredHit)>> = BTreeMap::new();
    let mut tag: Option<String> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(name, e))?;
        let lineno = i + 1;
        let err = |reason: String| Error::Parse {
            file: name.to_owned(),
            line: lineno,
            reason,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => continue,
            [qid, _q0, pid, rank, score, run_tag] => {
                let rank: usize = rank.parse().map_err(|_| err(format!("rank {rank:?} is not a positive integer")))?;
                let score: f64 = score.parse().map_err(|_| err(format!("score {score:?} is not a number")))?;
                if !score.is_finite() {
                    return Err(err(format!("score {score} is not finite")));
                }
                tag.get_or_insert_with(|| run_tag.to_string());
                raw.entry(qid.to_string()).or_default().push((
                    lineno,
                    ScoredHit {
                        passage_id: pid.to_string(),
                        score,
                        rank,
                    },
                ));
            }
            other => return Err(err(format!("expected 6 fields, found {}", other.len()))),
        }
    }

    let mut run = RunFile::new(tag.unwrap_or_default());
    for (qid, mut hits) in raw {
        hits.sort_by_key(|(_, h)| h.rank);
        let mut seen = HashSet::new();
        for (expected, (lineno, h)) in (1..).zip(&hits) {
            let err = |reason: String| Error::Parse {
                file: name.to_owned(),
                line: *lineno,
                reason,
            };
            if h.rank != expected {
                return Err(err(format!("{qid}: ranks must run 1..n, found {} where {expected} expected", h.rank)));
            }
            if !seen.insert(h.passage_id.as_str()) {
                return Err(err(format!("{qid}: duplicate passage {}", h.passage_id)));
            }
        }
        run.runs.insert(qid, hits.into_iter().map(|(_, h)| h).collect());
    }
    Ok(run)
}
