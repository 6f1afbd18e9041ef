use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;

use super::{Genre, NormalizationConfig, Passage, RawDocument, Unit};

static BLANK_LINES: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\n(?:[ \t\r]*\n)+").unwrap());

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Segmentation {
    pub passages: Vec<Passage>,
    pub warning: Option<String>,
}

/// Split a document into passages.
///
/// Paragraphs are separated by one or more blank lines. Segments that analyze to
/// zero tokens are dropped and ordinals count only the surviving paragraphs.
pub fn segment_paragraphs(doc: &RawDocument, unit: Unit, cfg: &NormalizationConfig) -> Segmentation {
    let passages: Vec<Passage> = match unit {
        Unit::Document => {
            let tokens = cfg.analyze(&doc.text);
            if tokens.is_empty() {
                Vec::new()
            } else {
                vec![Passage {
                    passage_id: doc.doc_id.clone(),
                    doc_id: doc.doc_id.clone(),
                    genre: doc.genre,
                    tokens,
                    text: doc.text.clone(),
                }]
            }
        }
        Unit::Paragraph => BLANK_LINES
            .split(&doc.text)
            .filter_map(|seg| {
                let tokens = cfg.analyze(seg);
                (!tokens.is_empty()).then(|| (seg.trim(), tokens))
            })
            .enumerate()
            .map(|(ordinal, (seg, tokens))| Passage {
                passage_id: format!("{}#{ordinal}", doc.doc_id),
                doc_id: doc.doc_id.clone(),
                genre: doc.genre,
                tokens,
                text: seg.to_owned(),
            })
            .collect(),
    };
    let warning = passages
        .is_empty()
        .then(|| format!("{}: body has no tokens, document dropped", doc.doc_id));
    Segmentation { passages, warning }
}

/// Segment every document in parallel. Output is sorted by passage id.
pub fn build_passages(
    docs: &[RawDocument],
    unit: Unit,
    cfg: &NormalizationConfig,
) -> (Vec<Passage>, Vec<String>) {
    let segs: Vec<Segmentation> = docs.par_iter().map(|d| segment_paragraphs(d, unit, cfg)).collect();
    let mut passages = Vec::new();
    let mut warnings = Vec::new();
    for seg in segs {
        passages.extend(seg.passages);
        warnings.extend(seg.warning);
    }
    passages.par_sort_unstable_by(|a, b| a.passage_id.cmp(&b.passage_id));
    (passages, warnings)
}

/// Split passages into `(fiction, nonfiction)`, preserving order.
pub fn partition_by_genre(passages: Vec<Passage>) -> (Vec<Passage>, Vec<Passage>) {
    passages.into_iter().partition(|p| p.genre == Genre::Fiction)
}
