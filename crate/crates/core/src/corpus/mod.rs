//! Corpus ingestion, normalization and passage segmentation.

mod ingest;
mod normalize;
mod segment;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use ingest::{ingest_corpus, ingest_reader, IngestReport, RecordError};
pub use normalize::{normalize, tokenize, NormalizationConfig};
pub use segment::{build_passages, partition_by_genre, segment_paragraphs, Segmentation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Genre {
    Fiction,
    #[serde(rename = "nonfiction")]
    NonFiction,
}

impl Genre {
    pub fn as_str(self) -> &'static str {
        match self {
            Genre::Fiction => "fiction",
            Genre::NonFiction => "nonfiction",
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Genre {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "fiction" => Ok(Genre::Fiction),
            "nonfiction" => Ok(Genre::NonFiction),
            other => Err(format!("unknown genre {other:?}")),
        }
    }
}

/// Retrieval unit: whole documents or blank-line-delimited paragraphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[serde(rename = "doc")]
    Document,
    #[default]
    #[serde(rename = "para")]
    Paragraph,
}

impl FromStr for Unit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "doc" | "document" => Ok(Unit::Document),
            "para" | "paragraph" => Ok(Unit::Paragraph),
            other => Err(format!("unknown unit {other:?} (expected doc or para)")),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Document => "doc",
            Unit::Paragraph => "para",
        })
    }
}

/// One record of the corpus JSON Lines input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub author: Option<String>,
    #[serde(default)]
    pub year: Option<i32>,
    pub genre: Genre,
    pub text: String,
}

/// The retrieval unit handed to the indexer.
#[derive(Debug, Clone, PartialEq)]
pub struct Passage {
    /// `doc_id` in document mode, `doc_id#ordinal` in paragraph mode.
    pub passage_id: String,
    pub doc_id: String,
    pub genre: Genre,
    pub tokens: Vec<String>,
    /// Raw (unnormalized) text of the segment, used for assessment and display.
    pub text: String,
}

impl Passage {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}
