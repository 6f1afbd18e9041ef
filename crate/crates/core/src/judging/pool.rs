use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::Index;
use crate::retrieval::{search, Bm25Params, Query};

/// One topic: a canonical query plus alternative phrasings used only for pooling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicSpec {
    pub qid: String,
    pub query: String,
    #[serde(default)]
    pub variants: Vec<String>,
}

/// Read a JSON Lines topics file. Blank lines are skipped; duplicate qids are an error.
pub fn load_topics(path: impl AsRef<Path>) -> Result<Vec<TopicSpec>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_topics(BufReader::new(file), &path.display().to_string())
}

pub fn parse_topics<R: BufRead>(reader: R, name: &str) -> Result<Vec<TopicSpec>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::Parse {
            file: name.to_owned(),
            line: i + 1,
            reason,
        };
        let topic: TopicSpec = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if !seen.insert(topic.qid.clone()) {
            return Err(parse_err(format!("duplicate qid {}", topic.qid)));
        }
        out.push(topic);
    }
    Ok(out)
}

/// Which phrasing of the topic surfaced a passage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolSource {
    Canonical,
    /// 1-based position in `TopicSpec::variants`.
    Variant(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pool {
    pub qid: String,
    /// passage id → every phrasing whose top-k contained it.
    pub passages: BTreeMap<String, BTreeSet<PoolSource>>,
    /// Every phrasing analyzed to nothing, so nothing could be pooled.
    pub unanswerable: bool,
}

impl Pool {
    pub fn len(&self) -> usize {
        self.passages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passages.is_empty()
    }

    pub fn passage_ids(&self) -> impl Iterator<Item = &str> {
        self.passages.keys().map(String::as_str)
    }
}

/// Union of the BM25 top-`k` for the canonical query and every variant.
pub fn pool_candidates(topic: &TopicSpec, index: &Index, k: usize, bm25: &Bm25Params) -> Result<Pool> {
    let phrasings = std::iter::once((PoolSource::Canonical, topic.query.as_str()))
        .chain(topic.variants.iter().enumerate().map(|(i, v)| (PoolSource::Variant(i + 1), v.as_str())));
    let mut passages: BTreeMap<String, BTreeSet<PoolSource>> = BTreeMap::new();
    let mut answerable = false;
    for (source, text) in phrasings {
        let query = Query::analyze(&topic.qid, text, index.analysis());
        let result = search(index, &query, k, bm25)?;
        answerable |= !result.unanswerable;
        for hit in result.hits {
            passages.entry(hit.passage_id).or_default().insert(source);
        }
    }
    Ok(Pool {
        qid: topic.qid.clone(),
        passages,
        unanswerable: !answerable,
    })
}
