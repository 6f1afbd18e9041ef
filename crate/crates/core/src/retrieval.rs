//! BM25 scoring for plain and weighted queries.
//!
//! Weighted queries (the output of relevance feedback) are scored as per-term
//! multiplicative boosts on BM25:
//!
//! ```text
//! score(D) = Σ_t w(t) · idf(t) · tf·(k1+1) / (tf + k1·(1 − b + b·dl/avgdl))
//! ```
//!
//! A plain query is the special case where `w(t)` is the term's count in the query.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::NormalizationConfig;
use crate::error::{Error, Result};
use crate::index::Index;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1.is_finite() && self.k1 >= 0.0) {
            return Err(Error::InvalidParam(format!("k1 must be >= 0, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidParam(format!("b must be in [0, 1], got {}", self.b)));
        }
        Ok(())
    }
}

/// A keyword query analyzed with a collection's normalization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub qid: String,
    pub text: String,
    pub terms: Vec<String>,
}

impl Query {
    pub fn analyze(qid: impl Into<String>, text: impl Into<String>, cfg: &NormalizationConfig) -> Query {
        let text = text.into();
        let terms = cfg.analyze(&text);
        Query {
            qid: qid.into(),
            text,
            terms,
        }
    }

    /// A query with no terms after analysis cannot be scored.
    pub fn is_answerable(&self) -> bool {
        !self.terms.is_empty()
    }

    /// Distinct terms with their multiplicities, sorted by term.
    pub fn term_counts(&self) -> BTreeMap<&str, usize> {
        let mut out = BTreeMap::new();
        for t in &self.terms {
            *out.entry(t.as_str()).or_default() += 1;
        }
        out
    }
}

/// Query as a term → non-negative weight map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedQuery {
    pub qid: String,
    pub weights: BTreeMap<String, f64>,
}

impl WeightedQuery {
    pub fn new(qid: impl Into<String>, weights: BTreeMap<String, f64>) -> Result<WeightedQuery> {
        if let Some((t, w)) = weights.iter().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidParam(format!("weight for {t:?} must be finite and >= 0, got {w}")));
        }
        if !weights.values().any(|&w| w > 0.0) {
            return Err(Error::InvalidParam("weighted query needs at least one positive weight".into()));
        }
        Ok(WeightedQuery {
            qid: qid.into(),
            weights,
        })
    }

    /// Weight each distinct term by its count in the query.
    pub fn from_query(query: &Query) -> Result<WeightedQuery> {
        let weights = query
            .term_counts()
            .into_iter()
            .map(|(t, c)| (t.to_owned(), c as f64))
            .collect();
        WeightedQuery::new(query.qid.clone(), weights)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredHit {
    pub passage_id: String,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

impl AsRef<str> for ScoredHit {
    fn as_ref(&self) -> &str {
        &self.passage_id
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchResult {
    pub hits: Vec<ScoredHit>,
    /// Set when the query had no terms after analysis.
    pub unanswerable: bool,
}

/// `ln(1 + (N − df + 0.5)/(df + 0.5))`, non-negative for every df.
pub fn idf(index: &Index, term: &str) -> f64 {
    idf_from_counts(index.num_passages(), index.df(term))
}

pub fn idf_from_counts(num_passages: usize, df: u32) -> f64 {
    let n = num_passages as f64;
    let df = f64::from(df);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

#[inline]
fn tf_component(tf: f64, dl: f64, avgdl: f64, p: &Bm25Params) -> f64 {
    tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * dl / avgdl))
}

/// BM25 contribution of one term, without the query-side multiplier.
pub fn term_score(index: &Index, term: &str, passage_ref: u32, params: &Bm25Params) -> f64 {
    let tf = index.tf(passage_ref, term);
    if tf == 0 {
        return 0.0;
    }
    idf(index, term)
        * tf_component(
            f64::from(tf),
            f64::from(index.passage_len(passage_ref)),
            index.avgdl(),
            params,
        )
}

/// Score one passage. Duplicate query terms count once per occurrence.
pub fn bm25_score(index: &Index, passage_ref: u32, query: &Query, params: &Bm25Params) -> f64 {
    query
        .term_counts()
        .into_iter()
        .map(|(t, c)| c as f64 * term_score(index, t, passage_ref, params))
        .sum()
}

pub fn weighted_score(index: &Index, passage_ref: u32, wq: &WeightedQuery, params: &Bm25Params) -> f64 {
    wq.weights
        .iter()
        .map(|(t, &w)| w * term_score(index, t, passage_ref, params))
        .sum()
}

/// Top-`k` passages by BM25. Ties are broken by passage id, ascending.
pub fn search(index: &Index, query: &Query, k: usize, params: &Bm25Params) -> Result<SearchResult> {
    if !query.is_answerable() {
        check_k(k)?;
        return Ok(SearchResult {
            hits: Vec::new(),
            unanswerable: true,
        });
    }
    let terms: Vec<(&str, f64)> = query.term_counts().into_iter().map(|(t, c)| (t, c as f64)).collect();
    rank(index, &terms, k, params)
}

/// Top-`k` passages for a weighted query; same tie rule as [`search`].
pub fn search_weighted(index: &Index, wq: &WeightedQuery, k: usize, params: &Bm25Params) -> Result<SearchResult> {
    let terms: Vec<(&str, f64)> = wq
        .weights
        .iter()
        .filter(|(_, &w)| w > 0.0)
        .map(|(t, &w)| (t.as_str(), w))
        .collect();
    if terms.is_empty() {
        check_k(k)?;
        return Ok(SearchResult {
            hits: Vec::new(),
            unanswerable: true,
        });
    }
    rank(index, &terms, k, params)
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParam("search depth must be >= 1".into()));
    }
    Ok(())
}

/// Term-at-a-time accumulation. Terms arrive sorted, so each passage's score is
/// summed in the same order as [`bm25_score`] and [`weighted_score`].
fn rank(index: &Index, terms: &[(&str, f64)], k: usize, params: &Bm25Params) -> Result<SearchResult> {
    check_k(k)?;
    params.validate()?;
    let n = index.num_passages();
    let avgdl = index.avgdl();
    let mut acc = vec![0.0f64; n];
    let mut touched: Vec<u32> = Vec::new();
    let mut seen = vec![false; n];

    for &(term, mult) in terms {
        let Some(tid) = index.term_id(term) else { continue };
        let plist = index.postings_by_id(tid);
        let idf = idf_from_counts(n, plist.len() as u32);
        for p in plist {
            let r = p.passage_ref as usize;
            let dl = f64::from(index.passage_len(p.passage_ref));
            acc[r] += mult * (idf * tf_component(f64::from(p.tf), dl, avgdl, params));
            if !seen[r] {
                seen[r] = true;
                touched.push(p.passage_ref);
            }
        }
    }

    let cmp = |a: &u32, b: &u32| -> Ordering {
        acc[*b as usize]
            .total_cmp(&acc[*a as usize])
            .then_with(|| index.passage_id(*a).cmp(index.passage_id(*b)))
    };
    touched.retain(|&r| acc[r as usize] > 0.0);
    if touched.len() > k {
        touched.select_nth_unstable_by(k - 1, cmp);
        touched.truncate(k);
    }
    touched.sort_unstable_by(cmp);

    let hits = touched
        .into_iter()
        .enumerate()
        .map(|(i, r)| ScoredHit {
            passage_id: index.passage_id(r).to_owned(),
            score: acc[r as usize],
            rank: i + 1,
        })
        .collect();
    Ok(SearchResult {
        hits,
        unanswerable: false,
    })
}
