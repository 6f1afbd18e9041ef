//! Inverted index with per-collection statistics.
//!
//! Each [`Index`] is self-contained: it owns its vocabulary, postings and
//! collection statistics. Cross-genre feedback composes several of them rather
//! than sharing a dictionary.

mod storage;
mod varint;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Genre, NormalizationConfig, Passage, Unit};
use crate::error::{Error, Result};

pub use storage::FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollectionLabel {
    Fiction,
    #[serde(rename = "nonfiction")]
    NonFiction,
    Merged,
}

impl CollectionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CollectionLabel::Fiction => "fiction",
            CollectionLabel::NonFiction => "nonfiction",
            CollectionLabel::Merged => "merged",
        }
    }

    pub fn admits(self, genre: Genre) -> bool {
        match self {
            CollectionLabel::Fiction => genre == Genre::Fiction,
            CollectionLabel::NonFiction => genre == Genre::NonFiction,
            CollectionLabel::Merged => true,
        }
    }
}

impl From<Genre> for CollectionLabel {
    fn from(g: Genre) -> Self {
        match g {
            Genre::Fiction => CollectionLabel::Fiction,
            Genre::NonFiction => CollectionLabel::NonFiction,
        }
    }
}

impl fmt::Display for CollectionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CollectionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "fiction" => Ok(CollectionLabel::Fiction),
            "nonfiction" => Ok(CollectionLabel::NonFiction),
            "merged" => Ok(CollectionLabel::Merged),
            other => Err(format!("unknown collection {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub passage_ref: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectionStats {
    pub num_passages: usize,
    pub total_tokens: u64,
    pub avgdl: f64,
}

/// Contents of `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexMeta {
    pub format_version: u32,
    pub label: CollectionLabel,
    pub unit: Unit,
    pub analysis: NormalizationConfig,
    pub num_passages: usize,
    pub total_tokens: u64,
    pub vocabulary_size: usize,
}

/// Per-passage record used when (re)building an index.
#[derive(Debug, Clone)]
pub(crate) struct CountedPassage {
    pub passage_id: String,
    pub doc_id: String,
    pub genre: Genre,
    /// Sorted by term, tf >= 1.
    pub terms: Vec<(String, u32)>,
}

#[derive(Debug, Clone)]
pub struct Index {
    meta: IndexMeta,
    stats: CollectionStats,
    vocab: Vec<String>,
    term_ids: HashMap<String, u32>,
    postings: Vec<Vec<Posting>>,
    cf: Vec<u64>,
    passage_ids: Vec<String>,
    doc_ids: Vec<String>,
    genres: Vec<Genre>,
    lengths: Vec<u32>,
    /// Transposed postings: per passage, `(term_id, tf)` sorted by term id.
    forward: Vec<Vec<(u32, u32)>>,
}

impl Index {
    /// Build an index over `passages`. Internal ids follow passage-id sort order,
    /// so the result does not depend on input order or thread count.
    pub fn build(
        passages: &[Passage],
        label: CollectionLabel,
        unit: Unit,
        analysis: NormalizationConfig,
    ) -> Result<Index> {
        if passages.is_empty() {
            return Err(Error::EmptyCollection);
        }
        if let Some(p) = passages.iter().find(|p| !label.admits(p.genre)) {
            return Err(Error::GenreMismatch {
                passage_id: p.passage_id.clone(),
                expected: label,
                found: p.genre,
            });
        }
        let counted: Vec<CountedPassage> = passages
            .par_iter()
            .filter(|p| !p.tokens.is_empty())
            .map(|p| {
                let mut counts: HashMap<&str, u32> = HashMap::new();
                for t in &p.tokens {
                    *counts.entry(t.as_str()).or_default() += 1;
                }
                let mut terms: Vec<(String, u32)> = counts.into_iter().map(|(t, c)| (t.to_owned(), c)).collect();
                terms.sort_unstable();
                CountedPassage {
                    passage_id: p.passage_id.clone(),
                    doc_id: p.doc_id.clone(),
                    genre: p.genre,
                    terms,
                }
            })
            .collect();
        Self::from_counted(counted, label, unit, analysis)
    }

    pub(crate) fn from_counted(
        mut passages: Vec<CountedPassage>,
        label: CollectionLabel,
        unit: Unit,
        analysis: NormalizationConfig,
    ) -> Result<Index> {
        if passages.is_empty() {
            return Err(Error::EmptyCollection);
        }
        passages.par_sort_unstable_by(|a, b| a.passage_id.cmp(&b.passage_id));
        if let Some(w) = passages.windows(2).find(|w| w[0].passage_id == w[1].passage_id) {
            return Err(Error::DuplicatePassage(w[0].passage_id.clone()));
        }

        let vocab: Vec<String> = passages
            .iter()
            .flat_map(|p| p.terms.iter().map(|(t, _)| t.as_str()))
            .collect::<BTreeSet<&str>>()
            .into_iter()
            .map(str::to_owned)
            .collect();
        let term_ids: HashMap<String, u32> = vocab.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();

        let mut postings = vec![Vec::new(); vocab.len()];
        let mut cf = vec![0u64; vocab.len()];
        let mut forward = Vec::with_capacity(passages.len());
        let mut lengths = Vec::with_capacity(passages.len());
        let mut passage_ids = Vec::with_capacity(passages.len());
        let mut doc_ids = Vec::with_capacity(passages.len());
        let mut genres = Vec::with_capacity(passages.len());

        for (pref, p) in passages.into_iter().enumerate() {
            let mut fwd: Vec<(u32, u32)> = p.terms.iter().map(|(t, tf)| (term_ids[t], *tf)).collect();
            // Term ids follow lexicographic order, so fwd is already sorted; keep it explicit.
            fwd.sort_unstable_by_key(|&(id, _)| id);
            let mut len = 0u32;
            for &(tid, tf) in &fwd {
                postings[tid as usize].push(Posting {
                    passage_ref: pref as u32,
                    tf,
                });
                cf[tid as usize] += u64::from(tf);
                len += tf;
            }
            forward.push(fwd);
            lengths.push(len);
            passage_ids.push(p.passage_id);
            doc_ids.push(p.doc_id);
            genres.push(p.genre);
        }

        let total_tokens: u64 = lengths.iter().map(|&l| u64::from(l)).sum();
        let num_passages = passage_ids.len();
        let stats = CollectionStats {
            num_passages,
            total_tokens,
            avgdl: total_tokens as f64 / num_passages as f64,
        };
        let meta = IndexMeta {
            format_version: FORMAT_VERSION,
            label,
            unit,
            analysis,
            num_passages,
            total_tokens,
            vocabulary_size: vocab.len(),
        };
        Ok(Index {
            meta,
            stats,
            vocab,
            term_ids,
            postings,
            cf,
            passage_ids,
            doc_ids,
            genres,
            lengths,
            forward,
        })
    }

    pub(crate) fn to_counted(&self) -> Vec<CountedPassage> {
        (0..self.num_passages())
            .map(|r| CountedPassage {
                passage_id: self.passage_ids[r].clone(),
                doc_id: self.doc_ids[r].clone(),
                genre: self.genres[r],
                terms: self.forward[r]
                    .iter()
                    .map(|&(tid, tf)| (self.vocab[tid as usize].clone(), tf))
                    .collect(),
            })
            .collect()
    }

    /// Union of two collections. Statistics are additive and internal ids are
    /// reassigned in passage-id order, which makes merging associative.
    pub fn merge(a: &Index, b: &Index) -> Result<Index> {
        if a.meta.analysis != b.meta.analysis || a.meta.unit != b.meta.unit {
            return Err(Error::ConfigMismatch);
        }
        let (small, large) = if a.num_passages() <= b.num_passages() { (a, b) } else { (b, a) };
        if let Some(id) = small.passage_ids.iter().find(|id| large.passage_ref(id).is_some()) {
            return Err(Error::PassageCollision(id.clone()));
        }
        let mut counted = a.to_counted();
        counted.extend(b.to_counted());
        Index::from_counted(counted, CollectionLabel::Merged, a.meta.unit, a.meta.analysis.clone())
    }

    pub fn meta(&self) -> &IndexMeta {
        &self.meta
    }

    pub fn label(&self) -> CollectionLabel {
        self.meta.label
    }

    pub fn analysis(&self) -> &NormalizationConfig {
        &self.meta.analysis
    }

    pub fn stats(&self) -> &CollectionStats {
        &self.stats
    }

    pub fn num_passages(&self) -> usize {
        self.stats.num_passages
    }

    pub fn avgdl(&self) -> f64 {
        self.stats.avgdl
    }

    pub fn total_tokens(&self) -> u64 {
        self.stats.total_tokens
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.term_ids.get(term).copied()
    }

    pub fn term(&self, id: u32) -> &str {
        &self.vocab[id as usize]
    }

    pub fn df(&self, term: &str) -> u32 {
        self.term_id(term).map_or(0, |id| self.postings[id as usize].len() as u32)
    }

    pub fn cf(&self, term: &str) -> u64 {
        self.term_id(term).map_or(0, |id| self.cf[id as usize])
    }

    pub fn cf_by_id(&self, id: u32) -> u64 {
        self.cf[id as usize]
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.term_id(term).map_or(&[], |id| &self.postings[id as usize])
    }

    pub fn postings_by_id(&self, id: u32) -> &[Posting] {
        &self.postings[id as usize]
    }

    /// True iff `term` occurs in at least one passage of this collection.
    pub fn vocabulary_contains(&self, term: &str) -> bool {
        self.term_ids.contains_key(term)
    }

    /// Terms in lexicographic order.
    pub fn vocabulary(&self) -> impl ExactSizeIterator<Item = &str> {
        self.vocab.iter().map(String::as_str)
    }

    pub fn passage_id(&self, passage_ref: u32) -> &str {
        &self.passage_ids[passage_ref as usize]
    }

    pub fn passage_ref(&self, passage_id: &str) -> Option<u32> {
        self.passage_ids
            .binary_search_by(|p| p.as_str().cmp(passage_id))
            .ok()
            .map(|i| i as u32)
    }

    pub fn doc_id(&self, passage_ref: u32) -> &str {
        &self.doc_ids[passage_ref as usize]
    }

    pub fn genre(&self, passage_ref: u32) -> Genre {
        self.genres[passage_ref as usize]
    }

    pub fn passage_len(&self, passage_ref: u32) -> u32 {
        self.lengths[passage_ref as usize]
    }

    /// `(term_id, tf)` pairs of one passage, sorted by term id.
    pub fn passage_terms(&self, passage_ref: u32) -> &[(u32, u32)] {
        &self.forward[passage_ref as usize]
    }

    pub fn tf(&self, passage_ref: u32, term: &str) -> u32 {
        let Some(id) = self.term_id(term) else { return 0 };
        let fwd = &self.forward[passage_ref as usize];
        fwd.binary_search_by_key(&id, |&(t, _)| t).map_or(0, |i| fwd[i].1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn passage(id: &str, genre: Genre, text: &str) -> Passage {
        Passage {
            passage_id: id.into(),
            doc_id: id.split('#').next().unwrap().into(),
            genre,
            tokens: text.split_whitespace().map(str::to_owned).collect(),
            text: text.into(),
        }
    }

    fn build(ps: &[Passage], label: CollectionLabel) -> Result<Index> {
        Index::build(ps, label, Unit::Paragraph, NormalizationConfig::default())
    }

    #[test]
    fn two_passage_stats() {
        let idx = build(
            &[passage("d1", Genre::Fiction, "a b"), passage("d2", Genre::Fiction, "a")],
            CollectionLabel::Fiction,
        )
        .unwrap();
        assert_eq!(idx.num_passages(), 2);
        assert_eq!(idx.avgdl(), 1.5);
        assert_eq!(idx.df("a"), 2);
        assert_eq!(idx.cf("a"), 2);
        assert_eq!(idx.df("b"), 1);
        assert_eq!(idx.df("zzz"), 0);
    }

    #[test]
    fn single_passage_repeated_term() {
        let idx = build(&[passage("d1", Genre::Fiction, "a a a")], CollectionLabel::Fiction).unwrap();
        assert_eq!(idx.num_passages(), 1);
        assert_eq!(idx.avgdl(), 3.0);
        assert_eq!(idx.df("a"), 1);
        assert_eq!(idx.cf("a"), 3);
        assert_eq!(idx.tf(0, "a"), 3);
    }

    #[test]
    fn empty_collection_is_rejected() {
        assert!(matches!(build(&[], CollectionLabel::Fiction), Err(Error::EmptyCollection)));
    }

    #[test]
    fn wrong_genre_is_rejected() {
        let err = build(&[passage("d1", Genre::NonFiction, "a")], CollectionLabel::Fiction).unwrap_err();
        assert!(matches!(err, Error::GenreMismatch { .. }));
        assert!(build(&[passage("d1", Genre::NonFiction, "a")], CollectionLabel::Merged).is_ok());
    }

    #[test]
    fn duplicate_passage_ids_are_rejected() {
        let ps = [passage("d1", Genre::Fiction, "a"), passage("d1", Genre::Fiction, "b")];
        assert!(matches!(build(&ps, CollectionLabel::Fiction), Err(Error::DuplicatePassage(_))));
    }

    #[test]
    fn ids_follow_passage_id_order() {
        let ps = [
            passage("c", Genre::Fiction, "x"),
            passage("a", Genre::Fiction, "x y"),
            passage("b", Genre::Fiction, "y"),
        ];
        let idx = build(&ps, CollectionLabel::Fiction).unwrap();
        assert_eq!(idx.passage_id(0), "a");
        assert_eq!(idx.passage_ref("c"), Some(2));
        assert_eq!(idx.passage_ref("zz"), None);
        let refs: Vec<u32> = idx.postings("x").iter().map(|p| p.passage_ref).collect();
        assert_eq!(refs, [0, 2]);
    }

    #[test]
    fn vocabulary_membership_is_per_collection() {
        let fic = build(&[passage("f", Genre::Fiction, "revelry wine")], CollectionLabel::Fiction).unwrap();
        let non = build(&[passage("n", Genre::NonFiction, "temperance wine")], CollectionLabel::NonFiction).unwrap();
        assert!(fic.vocabulary_contains("wine"));
        assert!(non.vocabulary_contains("wine"));
        assert!(fic.vocabulary_contains("revelry"));
        assert!(!non.vocabulary_contains("revelry"));
        assert!(!fic.vocabulary_contains("temperance"));
        assert!(!fic.vocabulary_contains("unseen"));
    }

    #[test]
    fn merge_rejects_mismatch_and_collisions() {
        let fic = build(&[passage("x", Genre::Fiction, "a")], CollectionLabel::Fiction).unwrap();
        let non = build(&[passage("x", Genre::NonFiction, "a")], CollectionLabel::NonFiction).unwrap();
        assert!(matches!(Index::merge(&fic, &non), Err(Error::PassageCollision(_))));

        let stemmed = Index::build(
            &[passage("y", Genre::NonFiction, "a")],
            CollectionLabel::NonFiction,
            Unit::Paragraph,
            NormalizationConfig {
                stem: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(matches!(Index::merge(&fic, &stemmed), Err(Error::ConfigMismatch)));

        let doc_unit = Index::build(
            &[passage("y", Genre::NonFiction, "a")],
            CollectionLabel::NonFiction,
            Unit::Document,
            NormalizationConfig::default(),
        )
        .unwrap();
        assert!(matches!(Index::merge(&fic, &doc_unit), Err(Error::ConfigMismatch)));
    }
}
