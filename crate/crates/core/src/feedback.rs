//! Relevance-model pseudo-relevance feedback and cross-genre transfer.
//!
//! Expansion runs five fixed stages:
//!
//! 1. first-pass BM25 on the feedback collection, keeping the top `M` passages;
//! 2. RM1 estimation over those passages with Dirichlet-smoothed language models;
//! 3. RM3 interpolation with the query's maximum-likelihood model;
//! 4. truncation to the `T` heaviest terms, renormalized;
//! 5. a vocabulary filter against the target collection, renormalized.
//!
//! Term weights always come from the feedback collection. The target collection
//! only decides which terms survive, so a fiction-estimated model can be applied
//! to non-fiction retrieval without borrowing non-fiction statistics.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{CollectionLabel, Index};
use crate::retrieval::{search, Bm25Params, Query, WeightedQuery};

/// Tolerance used when checking that a model is a probability distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeedbackParams {
    /// Number of feedback passages.
    #[serde(rename = "M")]
    pub fb_docs: usize,
    /// Number of expansion terms kept after truncation.
    #[serde(rename = "T")]
    pub fb_terms: usize,
    /// Weight of the original query model in the RM3 mixture.
    pub alpha: f64,
    /// Dirichlet prior mass.
    pub mu: f64,
}

impl Default for FeedbackParams {
    fn default() -> Self {
        Self {
            fb_docs: 10,
            fb_terms: 20,
            alpha: 0.5,
            mu: 1000.0,
        }
    }
}

impl FeedbackParams {
    pub fn validate(&self) -> Result<()> {
        if self.fb_docs == 0 {
            return Err(Error::InvalidParam("M must be >= 1".into()));
        }
        if self.fb_terms == 0 {
            return Err(Error::InvalidParam("T must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidParam(format!("alpha must be in [0, 1], got {}", self.alpha)));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::InvalidParam(format!("mu must be >= 0, got {}", self.mu)));
        }
        Ok(())
    }
}

/// A term distribution produced by feedback estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceModel {
    pub weights: BTreeMap<String, f64>,
    pub source: CollectionLabel,
    pub params: FeedbackParams,
}

impl RelevanceModel {
    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }

    /// True when every weight is positive and the weights sum to one.
    pub fn is_normalized(&self) -> bool {
        !self.weights.is_empty()
            && self.weights.values().all(|&w| w > 0.0 && w.is_finite())
            && (self.total() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    /// Terms by weight descending, ties by term ascending.
    pub fn ranked(&self) -> Vec<(&str, f64)> {
        let mut out: Vec<(&str, f64)> = self.weights.iter().map(|(t, &w)| (t.as_str(), w)).collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        out
    }

    fn renormalized(mut self) -> RelevanceModel {
        self.weights.retain(|_, w| *w > 0.0);
        let total = self.total();
        for w in self.weights.values_mut() {
            *w /= total;
        }
        self
    }
}

/// RM1 over the top `M` first-pass passages of `feedback_index`.
///
/// The candidate vocabulary is the set of terms occurring in the feedback
/// passages. Query terms unseen in the feedback collection are skipped when
/// computing the query likelihood, since their Dirichlet probability is zero
/// in every passage.
pub fn estimate_rm1(
    feedback_index: &Index,
    query: &Query,
    params: &FeedbackParams,
    bm25: &Bm25Params,
) -> Result<RelevanceModel> {
    params.validate()?;
    let first_pass = search(feedback_index, query, params.fb_docs, bm25)?;
    let refs: Vec<u32> = first_pass
        .hits
        .iter()
        .filter_map(|h| feedback_index.passage_ref(&h.passage_id))
        .collect();
    estimate_rm1_from_passages(feedback_index, query, &refs, params)
}

/// RM1 given an explicit feedback set.
pub fn estimate_rm1_from_passages(
    index: &Index,
    query: &Query,
    feedback: &[u32],
    params: &FeedbackParams,
) -> Result<RelevanceModel> {
    if feedback.is_empty() {
        return Err(Error::NoFeedbackDocuments);
    }
    let mu = params.mu;
    let collection_len = index.total_tokens() as f64;
    let query_ids: Vec<u32> = query.terms.iter().filter_map(|t| index.term_id(t)).collect();

    // log P(Q|D) for each feedback passage.
    let log_likelihoods: Vec<f64> = feedback
        .iter()
        .map(|&r| {
            let dl = f64::from(index.passage_len(r));
            let fwd = index.passage_terms(r);
            query_ids
                .iter()
                .map(|&qid| {
                    let tf = fwd.binary_search_by_key(&qid, |&(t, _)| t).map_or(0, |i| fwd[i].1);
                    let p = (f64::from(tf) + mu * index.cf_by_id(qid) as f64 / collection_len) / (dl + mu);
                    p.ln()
                })
                .sum()
        })
        .collect();
    let max = log_likelihoods.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return Err(Error::DegenerateFeedback);
    }
    // exp(log P(Q|D) − max): the common factor cancels under normalization.
    let doc_weights: Vec<f64> = log_likelihoods.iter().map(|&l| (l - max).exp()).collect();

    // Σ_D w_D·(tf + mu·cf/|C|)/(dl + mu)
    //   = Σ_D w_D·tf/(dl + mu) + (mu·cf/|C|)·Σ_D w_D/(dl + mu)
    let mut sparse: BTreeMap<u32, f64> = BTreeMap::new();
    let mut background = 0.0;
    for (&r, &wd) in feedback.iter().zip(&doc_weights) {
        let denom = f64::from(index.passage_len(r)) + mu;
        background += wd / denom;
        for &(tid, tf) in index.passage_terms(r) {
            *sparse.entry(tid).or_default() += wd * f64::from(tf) / denom;
        }
    }
    let weights: BTreeMap<String, f64> = sparse
        .into_iter()
        .map(|(tid, s)| {
            let smoothed = mu * index.cf_by_id(tid) as f64 / collection_len * background;
            (index.term(tid).to_owned(), s + smoothed)
        })
        .collect();

    let rm = RelevanceModel {
        weights,
        source: index.label(),
        params: *params,
    }
    .renormalized();
    if rm.weights.is_empty() {
        return Err(Error::DegenerateFeedback);
    }
    Ok(rm)
}

/// Query maximum-likelihood model: term count over query length.
pub fn query_mle(query: &Query) -> BTreeMap<String, f64> {
    let len = query.terms.len() as f64;
    query
        .term_counts()
        .into_iter()
        .map(|(t, c)| (t.to_owned(), c as f64 / len))
        .collect()
}

/// `alpha · MLE(w|Q) + (1 − alpha) · RM1(w)`, renormalized, zero weights dropped.
pub fn apply_rm3(rm1: &RelevanceModel, query: &Query, alpha: f64) -> RelevanceModel {
    if alpha == 0.0 {
        return RelevanceModel {
            params: FeedbackParams { alpha, ..rm1.params },
            ..rm1.clone()
        };
    }
    let mut weights: BTreeMap<String, f64> = rm1
        .weights
        .iter()
        .map(|(t, &w)| (t.clone(), (1.0 - alpha) * w))
        .collect();
    if alpha > 0.0 {
        for (t, p) in query_mle(query) {
            *weights.entry(t).or_default() += alpha * p;
        }
    }
    RelevanceModel {
        weights,
        source: rm1.source,
        params: FeedbackParams { alpha, ..rm1.params },
    }
    .renormalized()
}

/// Keep the `T` heaviest terms (ties: lexicographically smaller first) and renormalize.
pub fn truncate_renormalize(rm: &RelevanceModel, fb_terms: usize) -> RelevanceModel {
    if rm.weights.len() <= fb_terms {
        return rm.clone();
    }
    let weights = rm
        .ranked()
        .into_iter()
        .take(fb_terms)
        .map(|(t, w)| (t.to_owned(), w))
        .collect();
    RelevanceModel {
        weights,
        source: rm.source,
        params: rm.params,
    }
    .renormalized()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    /// Survivors, renormalized. `None` when nothing survived.
    pub model: Option<RelevanceModel>,
    /// Terms dropped because the target collection never uses them, with their
    /// pre-filter weights.
    pub filtered: Vec<(String, f64)>,
}

/// Drop terms absent from `target`'s vocabulary and renormalize the rest.
pub fn transfer_filter(rm: &RelevanceModel, target: &Index) -> FilterOutcome {
    let (kept, filtered): (BTreeMap<String, f64>, BTreeMap<String, f64>) = rm
        .weights
        .iter()
        .map(|(t, &w)| (t.clone(), w))
        .partition(|(t, _)| target.vocabulary_contains(t));
    let model = (!kept.is_empty()).then(|| {
        RelevanceModel {
            weights: kept,
            source: rm.source,
            params: rm.params,
        }
        .renormalized()
    });
    FilterOutcome {
        model,
        filtered: filtered.into_iter().collect(),
    }
}

/// Which collection plays which role in an expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferPolicy {
    /// Supplies the feedback passages and the term weights.
    pub feedback_source: CollectionLabel,
    /// Its vocabulary filters expansion candidates.
    pub target_vocab: CollectionLabel,
    /// The weighted query runs against this collection.
    pub retrieval_target: CollectionLabel,
}

/// The four experimental configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Policy {
    #[serde(rename = "NonFiction_base")]
    NonFictionBase,
    #[serde(rename = "NonFiction_RLM")]
    NonFictionRlm,
    #[serde(rename = "Fiction_RLM")]
    FictionRlm,
    #[serde(rename = "FictionNonFiction_RLM", alias = "Fiction-NonFiction_RLM")]
    FictionNonFictionRlm,
}

impl Policy {
    pub const ALL: [Policy; 4] = [
        Policy::NonFictionBase,
        Policy::NonFictionRlm,
        Policy::FictionRlm,
        Policy::FictionNonFictionRlm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::NonFictionBase => "NonFiction_base",
            Policy::NonFictionRlm => "NonFiction_RLM",
            Policy::FictionRlm => "Fiction_RLM",
            Policy::FictionNonFictionRlm => "FictionNonFiction_RLM",
        }
    }

    /// `None` for the unexpanded baseline.
    pub fn transfer(self) -> Option<TransferPolicy> {
        use CollectionLabel::*;
        let (feedback_source, target_vocab, retrieval_target) = match self {
            Policy::NonFictionBase => return None,
            Policy::NonFictionRlm => (NonFiction, NonFiction, NonFiction),
            Policy::FictionRlm => (Fiction, NonFiction, NonFiction),
            Policy::FictionNonFictionRlm => (Merged, NonFiction, NonFiction),
        };
        Some(TransferPolicy {
            feedback_source,
            target_vocab,
            retrieval_target,
        })
    }

    /// Collection the final ranking is computed on.
    pub fn retrieval_target(self) -> CollectionLabel {
        self.transfer()
            .map_or(CollectionLabel::NonFiction, |t| t.retrieval_target)
    }

    pub fn required_collections(self) -> Vec<CollectionLabel> {
        match self.transfer() {
            None => vec![CollectionLabel::NonFiction],
            Some(t) => {
                let mut v = vec![t.feedback_source, t.target_vocab, t.retrieval_target];
                v.sort();
                v.dedup();
                v
            }
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace(['-', '_', ' '], "");
        Policy::ALL
            .into_iter()
            .find(|p| p.as_str().to_ascii_lowercase().replace('_', "") == key)
            .ok_or_else(|| format!("unknown policy {s:?}"))
    }
}

/// The loaded collections, sharing one analysis configuration.
#[derive(Debug, Clone, Default)]
pub struct IndexSet {
    fiction: Option<Arc<Index>>,
    nonfiction: Option<Arc<Index>>,
    merged: Option<Arc<Index>>,
}

impl IndexSet {
    pub fn new(indexes: impl IntoIterator<Item = Arc<Index>>) -> Result<IndexSet> {
        let mut set = IndexSet::default();
        for idx in indexes {
            if let Some(first) = set.iter().next() {
                if first.analysis() != idx.analysis() || first.meta().unit != idx.meta().unit {
                    return Err(Error::ConfigMismatch);
                }
            }
            let slot = match idx.label() {
                CollectionLabel::Fiction => &mut set.fiction,
                CollectionLabel::NonFiction => &mut set.nonfiction,
                CollectionLabel::Merged => &mut set.merged,
            };
            *slot = Some(idx);
        }
        Ok(set)
    }

    pub fn get(&self, label: CollectionLabel) -> Result<&Index> {
        self.get_arc(label).map(Arc::as_ref)
    }

    pub fn get_arc(&self, label: CollectionLabel) -> Result<&Arc<Index>> {
        match label {
            CollectionLabel::Fiction => self.fiction.as_ref(),
            CollectionLabel::NonFiction => self.nonfiction.as_ref(),
            CollectionLabel::Merged => self.merged.as_ref(),
        }
        .ok_or(Error::MissingCollection(label))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Index>> {
        [&self.fiction, &self.nonfiction, &self.merged].into_iter().flatten()
    }

    /// Analyze `text` with the shared configuration.
    pub fn analyze(&self, qid: &str, text: &str) -> Result<Query> {
        let idx = self.iter().next().ok_or(Error::MissingCollection(CollectionLabel::NonFiction))?;
        Ok(Query::analyze(qid, text, idx.analysis()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TermStatus {
    Kept,
    Filtered,
}

impl TermStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TermStatus::Kept => "kept",
            TermStatus::Filtered => "filtered",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionTerm {
    pub term: String,
    /// Final weight for kept terms; pre-filter weight for filtered ones.
    pub weight: f64,
    pub source_genre: CollectionLabel,
    pub status: TermStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fallback {
    /// No expansion term exists in the target vocabulary.
    NoSurvivors,
    NoFeedbackDocuments,
    DegenerateFeedback,
}

/// Intermediate models, one per stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionStages {
    pub feedback_passages: Vec<String>,
    pub rm1: RelevanceModel,
    pub rm3: RelevanceModel,
    pub truncated: RelevanceModel,
    pub filter: FilterOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub qid: String,
    pub policy: TransferPolicy,
    pub params: FeedbackParams,
    pub query: WeightedQuery,
    /// Expansion terms ordered by pre-filter weight, descending.
    pub terms: Vec<ExpansionTerm>,
    pub fallback: Option<Fallback>,
    pub stages: Option<ExpansionStages>,
}

impl Expansion {
    /// The original query, unexpanded, with the reason recorded.
    pub fn unexpanded(query: &Query, policy: TransferPolicy, params: FeedbackParams, reason: Fallback) -> Result<Expansion> {
        Ok(Expansion {
            qid: query.qid.clone(),
            policy,
            params,
            query: WeightedQuery::from_query(query)?,
            terms: Vec::new(),
            fallback: Some(reason),
            stages: None,
        })
    }
}

/// Run the five expansion stages for one query.
pub fn expand_query(
    query: &Query,
    policy: TransferPolicy,
    params: &FeedbackParams,
    indexes: &IndexSet,
    bm25: &Bm25Params,
) -> Result<Expansion> {
    params.validate()?;
    let source = indexes.get(policy.feedback_source)?;
    let target = indexes.get(policy.target_vocab)?;
    indexes.get(policy.retrieval_target)?;

    let first_pass = search(source, query, params.fb_docs, bm25)?;
    let feedback_refs: Vec<u32> = first_pass
        .hits
        .iter()
        .filter_map(|h| source.passage_ref(&h.passage_id))
        .collect();
    let rm1 = estimate_rm1_from_passages(source, query, &feedback_refs, params)?;
    let rm3 = apply_rm3(&rm1, query, params.alpha);
    let truncated = truncate_renormalize(&rm3, params.fb_terms);
    let filter = transfer_filter(&truncated, target);

    let mut terms: Vec<ExpansionTerm> = truncated
        .ranked()
        .into_iter()
        .map(|(t, w)| {
            let final_weight = filter.model.as_ref().and_then(|m| m.weights.get(t).copied());
            ExpansionTerm {
                term: t.to_owned(),
                weight: final_weight.unwrap_or(w),
                source_genre: truncated.source,
                status: if final_weight.is_some() {
                    TermStatus::Kept
                } else {
                    TermStatus::Filtered
                },
            }
        })
        .collect();
    terms.shrink_to_fit();

    let (wq, fallback) = match &filter.model {
        Some(m) => (WeightedQuery::new(query.qid.clone(), m.weights.clone())?, None),
        None => (WeightedQuery::from_query(query)?, Some(Fallback::NoSurvivors)),
    };
    Ok(Expansion {
        qid: query.qid.clone(),
        policy,
        params: *params,
        query: wq,
        terms,
        fallback,
        stages: Some(ExpansionStages {
            feedback_passages: first_pass.hits.into_iter().map(|h| h.passage_id).collect(),
            rm1,
            rm3,
            truncated,
            filter,
        }),
    })
}

/// Like [`expand_query`], but feedback failures fall back to the unexpanded
/// query so every topic still gets a ranking.
pub fn expand_or_fallback(
    query: &Query,
    policy: TransferPolicy,
    params: &FeedbackParams,
    indexes: &IndexSet,
    bm25: &Bm25Params,
) -> Result<Expansion> {
    match expand_query(query, policy, params, indexes, bm25) {
        Err(Error::NoFeedbackDocuments) => Expansion::unexpanded(query, policy, *params, Fallback::NoFeedbackDocuments),
        Err(Error::DegenerateFeedback) => Expansion::unexpanded(query, policy, *params, Fallback::DegenerateFeedback),
        other => other,
    }
}

/// TSV rows `qid  term  weight  source_genre  kept|filtered`.
pub fn write_expansion_tsv<'a, W: Write>(mut out: W, expansions: impl IntoIterator<Item = &'a Expansion>) -> std::io::Result<()> {
    for e in expansions {
        for t in &e.terms {
            writeln!(
                out,
                "{}\t{}\t{:.6}\t{}\t{}",
                e.qid,
                t.term,
                t.weight,
                t.source_genre,
                t.status.as_str()
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Genre, NormalizationConfig, Passage, Unit};
    use approx::assert_abs_diff_eq;

    fn build(label: CollectionLabel, texts: &[(&str, &str)]) -> Index {
        let genre = match label {
            CollectionLabel::Fiction => Genre::Fiction,
            _ => Genre::NonFiction,
        };
        let ps: Vec<Passage> = texts
            .iter()
            .map(|(id, t)| Passage {
                passage_id: id.to_string(),
                doc_id: id.to_string(),
                genre,
                tokens: t.split_whitespace().map(str::to_owned).collect(),
                text: t.to_string(),
            })
            .collect();
        Index::build(&ps, label, Unit::Document, NormalizationConfig::default()).unwrap()
    }

    fn q(text: &str) -> Query {
        Query::analyze("q1", text, &NormalizationConfig::default())
    }

    fn params(m: usize, t: usize, alpha: f64, mu: f64) -> FeedbackParams {
        FeedbackParams {
            fb_docs: m,
            fb_terms: t,
            alpha,
            mu,
        }
    }

    fn model(pairs: &[(&str, f64)]) -> RelevanceModel {
        RelevanceModel {
            weights: pairs.iter().map(|(t, w)| (t.to_string(), *w)).collect(),
            source: CollectionLabel::Fiction,
            params: FeedbackParams::default(),
        }
    }

    #[test]
    fn single_document_rm1_is_its_mle() {
        let idx = build(CollectionLabel::Fiction, &[("d1", "a a b"), ("d2", "c d")]);
        let rm = estimate_rm1(&idx, &q("a"), &params(1, 10, 0.5, 0.0), &Bm25Params::default()).unwrap();
        assert_eq!(rm.weights.len(), 2);
        assert_abs_diff_eq!(rm.weights["a"], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rm.weights["b"], 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn duplicate_feedback_documents_change_nothing() {
        let idx = build(CollectionLabel::Fiction, &[("d1", "a b c a"), ("d2", "a b c a"), ("d3", "x y")]);
        let p = params(1, 10, 0.5, 50.0);
        let one = estimate_rm1_from_passages(&idx, &q("a"), &[0], &p).unwrap();
        let two = estimate_rm1_from_passages(&idx, &q("a"), &[0, 1], &p).unwrap();
        for (t, w) in &one.weights {
            assert_abs_diff_eq!(*w, two.weights[t], epsilon = 1e-15);
        }
    }

    #[test]
    fn rm1_errors() {
        let idx = build(CollectionLabel::Fiction, &[("d1", "a b"), ("d2", "c")]);
        let p = params(2, 10, 0.5, 0.0);
        assert!(matches!(
            estimate_rm1(&idx, &q("zzz"), &p, &Bm25Params::default()),
            Err(Error::NoFeedbackDocuments)
        ));
        // Both passages miss "c" or "a" and mu = 0 leaves no smoothing mass.
        assert!(matches!(
            estimate_rm1_from_passages(&idx, &q("a c"), &[0, 1], &p),
            Err(Error::DegenerateFeedback)
        ));
    }

    #[test]
    fn rm3_boundaries_and_hand_value() {
        let rm1 = model(&[("a", 0.5), ("b", 0.5)]);
        let mixed = apply_rm3(&rm1, &q("a"), 0.5);
        assert_abs_diff_eq!(mixed.weights["a"], 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(mixed.weights["b"], 0.25, epsilon = 1e-15);

        let only_query = apply_rm3(&rm1, &q("a c c"), 1.0);
        assert_eq!(only_query.weights.len(), 2);
        assert_abs_diff_eq!(only_query.weights["a"], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(only_query.weights["c"], 2.0 / 3.0, epsilon = 1e-15);

        let only_rm1 = apply_rm3(&rm1, &q("c"), 0.0);
        assert_eq!(only_rm1.weights, rm1.weights);
    }

    #[test]
    fn truncation() {
        let rm = model(&[("a", 0.5), ("b", 0.3), ("c", 0.2)]);
        assert_eq!(truncate_renormalize(&rm, 3), rm);
        assert_eq!(truncate_renormalize(&rm, 10), rm);
        let t = truncate_renormalize(&rm, 2);
        assert_eq!(t.weights.len(), 2);
        assert_abs_diff_eq!(t.weights["a"], 0.625, epsilon = 1e-15);
        assert_abs_diff_eq!(t.weights["b"], 0.375, epsilon = 1e-15);

        let tie = model(&[("zeta", 0.25), ("alpha", 0.25), ("top", 0.5)]);
        let t = truncate_renormalize(&tie, 2);
        assert!(t.weights.contains_key("alpha"));
        assert!(!t.weights.contains_key("zeta"));
    }

    #[test]
    fn filter_hand_value() {
        let target = build(CollectionLabel::NonFiction, &[("n1", "wine mask temperance")]);
        let rm = model(&[("wine", 0.5), ("revelry", 0.3), ("mask", 0.2)]);
        let out = transfer_filter(&rm, &target);
        let m = out.model.unwrap();
        assert_abs_diff_eq!(m.weights["wine"], 0.714286, epsilon = 1e-6);
        assert_abs_diff_eq!(m.weights["mask"], 0.285714, epsilon = 1e-6);
        assert_eq!(out.filtered, vec![("revelry".to_string(), 0.3)]);
        assert_eq!(m.source, CollectionLabel::Fiction);

        let all_in = model(&[("wine", 0.6), ("mask", 0.4)]);
        assert_eq!(transfer_filter(&all_in, &target).model.unwrap(), all_in);

        let none_in = model(&[("revelry", 1.0)]);
        let out = transfer_filter(&none_in, &target);
        assert!(out.model.is_none());
        assert_eq!(out.filtered.len(), 1);
    }

    #[test]
    fn policy_roles() {
        use CollectionLabel::*;
        assert_eq!(Policy::NonFictionBase.transfer(), None);
        let t = Policy::FictionRlm.transfer().unwrap();
        assert_eq!((t.feedback_source, t.target_vocab, t.retrieval_target), (Fiction, NonFiction, NonFiction));
        let t = Policy::FictionNonFictionRlm.transfer().unwrap();
        assert_eq!((t.feedback_source, t.target_vocab, t.retrieval_target), (Merged, NonFiction, NonFiction));
        for p in Policy::ALL {
            assert_eq!(p.as_str().parse::<Policy>().unwrap(), p);
        }
        assert_eq!("Fiction-NonFiction_RLM".parse::<Policy>().unwrap(), Policy::FictionNonFictionRlm);
        assert!("Bo1".parse::<Policy>().is_err());
    }

    #[test]
    fn empty_survivors_fall_back() {
        let fic = build(CollectionLabel::Fiction, &[("f1", "carnival revelry jest"), ("f2", "jest folly")]);
        let non = build(CollectionLabel::NonFiction, &[("n1", "temperance legislation")]);
        let set = IndexSet::new([Arc::new(fic), Arc::new(non)]).unwrap();
        let query = set.analyze("q1", "carnival").unwrap();
        let e = expand_query(
            &query,
            Policy::FictionRlm.transfer().unwrap(),
            &params(2, 5, 0.5, 10.0),
            &set,
            &Bm25Params::default(),
        )
        .unwrap();
        assert_eq!(e.fallback, Some(Fallback::NoSurvivors));
        assert!(e.terms.iter().all(|t| t.status == TermStatus::Filtered));
        assert_eq!(e.query, WeightedQuery::from_query(&query).unwrap());
    }

    #[test]
    fn missing_collection_is_an_error() {
        let non = build(CollectionLabel::NonFiction, &[("n1", "wine")]);
        let set = IndexSet::new([Arc::new(non)]).unwrap();
        let query = set.analyze("q1", "wine").unwrap();
        let err = expand_query(
            &query,
            Policy::FictionRlm.transfer().unwrap(),
            &FeedbackParams::default(),
            &set,
            &Bm25Params::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingCollection(CollectionLabel::Fiction)));
    }

    #[test]
    fn feedback_failure_falls_back_to_query() {
        let fic = build(CollectionLabel::Fiction, &[("f1", "revelry")]);
        let non = build(CollectionLabel::NonFiction, &[("n1", "wine")]);
        let set = IndexSet::new([Arc::new(fic), Arc::new(non)]).unwrap();
        let query = set.analyze("q1", "wine").unwrap();
        let e = expand_or_fallback(
            &query,
            Policy::FictionRlm.transfer().unwrap(),
            &FeedbackParams::default(),
            &set,
            &Bm25Params::default(),
        )
        .unwrap();
        assert_eq!(e.fallback, Some(Fallback::NoFeedbackDocuments));
        assert_eq!(e.query.weights.len(), 1);
    }

    #[test]
    fn expansion_tsv_format() {
        let fic = build(CollectionLabel::Fiction, &[("f1", "wine revelry wine"), ("f2", "mask")]);
        let non = build(CollectionLabel::NonFiction, &[("n1", "wine mask")]);
        let set = IndexSet::new([Arc::new(fic), Arc::new(non)]).unwrap();
        let query = set.analyze("q7", "wine").unwrap();
        let e = expand_query(
            &query,
            Policy::FictionRlm.transfer().unwrap(),
            &params(1, 10, 0.0, 0.0),
            &set,
            &Bm25Params::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_expansion_tsv(&mut buf, [&e]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "q7\twine\t1.000000\tfiction\tkept\nq7\trevelry\t0.333333\tfiction\tfiltered\n");
    }

    #[test]
    fn validation() {
        assert!(params(0, 1, 0.5, 1.0).validate().is_err());
        assert!(params(1, 0, 0.5, 1.0).validate().is_err());
        assert!(params(1, 1, 1.5, 1.0).validate().is_err());
        assert!(params(1, 1, 0.5, -1.0).validate().is_err());
        assert!(FeedbackParams::default().validate().is_ok());
    }
}
