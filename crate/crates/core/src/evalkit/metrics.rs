//! Per-query effectiveness metrics over graded judgments.
//!
//! Every function returns `None` when the query has nothing relevant to find,
//! so callers can exclude it from means instead of averaging in a zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// nDCG gain function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gain {
    /// gain = grade
    #[default]
    Linear,
    /// gain = 2^grade − 1
    Exponential,
}

impl Gain {
    fn of(self, grade: u8) -> f64 {
        match self {
            Gain::Linear => f64::from(grade),
            Gain::Exponential => 2f64.powi(i32::from(grade)) - 1.0,
        }
    }
}

fn is_rel(judged: &BTreeMap<String, u8>, pid: &str, binarize_at: u8) -> bool {
    judged.get(pid).is_some_and(|&g| g >= binarize_at)
}

fn num_relevant(judged: &BTreeMap<String, u8>, binarize_at: u8) -> usize {
    judged.values().filter(|&&g| g >= binarize_at).count()
}

/// `(1/R) · Σ_{k ≤ depth, rel(k)} P@k` where R counts every relevant judgment.
pub fn average_precision<S: AsRef<str>>(
    ranking: &[S],
    judged: &BTreeMap<String, u8>,
    binarize_at: u8,
    depth: usize,
) -> Option<f64> {
    let r = num_relevant(judged, binarize_at);
    if r == 0 {
        return None;
    }
    let mut found = 0usize;
    let mut sum = 0.0;
    for (k, pid) in ranking.iter().take(depth).enumerate() {
        if is_rel(judged, pid.as_ref(), binarize_at) {
            found += 1;
            sum += found as f64 / (k + 1) as f64;
        }
    }
    Some(sum / r as f64)
}

/// DCG with `log2(k + 1)` discount, normalized by the ideal ordering of all judgments.
pub fn ndcg<S: AsRef<str>>(ranking: &[S], judged: &BTreeMap<String, u8>, depth: usize, gain: Gain) -> Option<f64> {
    let mut ideal: Vec<u8> = judged.values().copied().filter(|&g| g > 0).collect();
    if ideal.is_empty() {
        return None;
    }
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let discount = |k: usize| ((k + 2) as f64).log2();
    let idcg: f64 = ideal
        .iter()
        .take(depth)
        .enumerate()
        .map(|(k, &g)| gain.of(g) / discount(k))
        .sum();
    let dcg: f64 = ranking
        .iter()
        .take(depth)
        .enumerate()
        .map(|(k, pid)| gain.of(judged.get(pid.as_ref()).copied().unwrap_or(0)) / discount(k))
        .sum();
    Some(dcg / idcg)
}

/// Relevant hits in the top `cutoff`, divided by `cutoff` even if fewer hits exist.
pub fn precision_at<S: AsRef<str>>(
    ranking: &[S],
    judged: &BTreeMap<String, u8>,
    binarize_at: u8,
    cutoff: usize,
) -> Option<f64> {
    if num_relevant(judged, binarize_at) == 0 || cutoff == 0 {
        return None;
    }
    let hits = ranking
        .iter()
        .take(cutoff)
        .filter(|p| is_rel(judged, p.as_ref(), binarize_at))
        .count();
    Some(hits as f64 / cutoff as f64)
}

/// `1 / rank` of the first relevant hit within `depth`, 0 if none.
pub fn reciprocal_rank<S: AsRef<str>>(
    ranking: &[S],
    judged: &BTreeMap<String, u8>,
    binarize_at: u8,
    depth: usize,
) -> Option<f64> {
    if num_relevant(judged, binarize_at) == 0 {
        return None;
    }
    Some(
        ranking
            .iter()
            .take(depth)
            .position(|p| is_rel(judged, p.as_ref(), binarize_at))
            .map_or(0.0, |i| 1.0 / (i + 1) as f64),
    )
}

pub fn recall_at<S: AsRef<str>>(
    ranking: &[S],
    judged: &BTreeMap<String, u8>,
    binarize_at: u8,
    depth: usize,
) -> Option<f64> {
    let r = num_relevant(judged, binarize_at);
    if r == 0 {
        return None;
    }
    let found = ranking
        .iter()
        .take(depth)
        .filter(|p| is_rel(judged, p.as_ref(), binarize_at))
        .count();
    Some(found as f64 / r as f64)
}
