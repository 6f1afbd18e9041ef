use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metrics::{average_precision, ndcg, precision_at, recall_at, reciprocal_rank, Gain};
use super::trec::{QrelSet, RunFile};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "MAP")]
    Map,
    Recall,
    #[serde(rename = "nDCG")]
    Ndcg,
    #[serde(rename = "P@10")]
    P10,
    #[serde(rename = "MRR")]
    Mrr,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Map, Metric::Recall, Metric::Ndcg, Metric::P10, Metric::Mrr];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Map => "MAP",
            Metric::Recall => "Recall",
            Metric::Ndcg => "nDCG",
            Metric::P10 => "P@10",
            Metric::Mrr => "MRR",
        }
    }

    /// The per-query value this aggregate is the mean of.
    pub fn per_query(self, m: &QueryMetrics) -> f64 {
        match self {
            Metric::Map => m.ap,
            Metric::Recall => m.recall,
            Metric::Ndcg => m.ndcg,
            Metric::P10 => m.p10,
            Metric::Mrr => m.rr,
        }
    }

    pub fn aggregate(self, a: &Aggregate) -> f64 {
        match self {
            Metric::Map => a.map,
            Metric::Recall => a.recall,
            Metric::Ndcg => a.ndcg,
            Metric::P10 => a.p10,
            Metric::Mrr => a.mrr,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "map" | "ap" => Ok(Metric::Map),
            "recall" => Ok(Metric::Recall),
            "ndcg" => Ok(Metric::Ndcg),
            "p@10" | "p10" | "p_10" => Ok(Metric::P10),
            "mrr" | "rr" => Ok(Metric::Mrr),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    /// Rank cutoff for AP, recall, nDCG and RR.
    pub depth: usize,
    /// Minimum grade counted as relevant by the binary metrics.
    pub binarize_at: u8,
    pub gain: Gain,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            depth: 1000,
            binarize_at: 1,
            gain: Gain::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryMetrics {
    pub ap: f64,
    pub recall: f64,
    pub ndcg: f64,
    #[serde(rename = "p@10")]
    pub p10: f64,
    pub rr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregate {
    pub num_queries: usize,
    pub map: f64,
    pub recall: f64,
    pub ndcg: f64,
    #[serde(rename = "p@10")]
    pub p10: f64,
    pub mrr: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedQuery {
    pub qid: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub run_tag: String,
    pub settings: EvalSettings,
    pub per_query: BTreeMap<String, QueryMetrics>,
    pub aggregate: Aggregate,
    /// Queries left out of the means, with the reason.
    pub excluded: Vec<ExcludedQuery>,
    /// Judged queries the run has no ranking for; scored as empty rankings.
    pub missing_from_run: Vec<String>,
}

impl EvalReport {
    /// Per-query values of `metric`, in qid order.
    pub fn values(&self, metric: Metric) -> Vec<(&str, f64)> {
        self.per_query
            .iter()
            .map(|(q, m)| (q.as_str(), metric.per_query(m)))
            .collect()
    }

    /// `qid,ap,recall,ndcg,p@10,rr` rows followed by an `all` row of means.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "qid,ap,recall,ndcg,p@10,rr")?;
        for (qid, m) in &self.per_query {
            writeln!(out, "{qid},{:.6},{:.6},{:.6},{:.6},{:.6}", m.ap, m.recall, m.ndcg, m.p10, m.rr)?;
        }
        let a = &self.aggregate;
        writeln!(out, "all,{:.6},{:.6},{:.6},{:.6},{:.6}", a.map, a.recall, a.ndcg, a.p10, a.mrr)
    }
}

const P_CUTOFF: usize = 10;

/// Score every judged query of `qrels` against `run`.
///
/// Means cover queries with at least one relevant passage. Judged queries
/// without a ranking count as empty rankings; run queries without judgments
/// are excluded.
pub fn evaluate_run(run: &RunFile, qrels: &QrelSet, settings: &EvalSettings) -> Result<EvalReport> {
    if settings.depth == 0 {
        return Err(Error::InvalidParam("evaluation depth must be >= 1".into()));
    }
    if !run.runs.keys().any(|q| qrels.judgments.contains_key(q)) {
        return Err(Error::DisjointQueries);
    }
    let mut per_query = BTreeMap::new();
    let mut excluded = Vec::new();
    let mut missing_from_run = Vec::new();

    for (qid, judged) in &qrels.judgments {
        let hits = run.hits(qid);
        let depth = settings.depth;
        let b = settings.binarize_at;
        let Some(ap) = average_precision(hits, judged, b, depth) else {
            excluded.push(ExcludedQuery {
                qid: qid.clone(),
                reason: "no relevant passages".into(),
            });
            continue;
        };
        if !run.runs.contains_key(qid) {
            missing_from_run.push(qid.clone());
        }
        let metrics = QueryMetrics {
            ap,
            recall: recall_at(hits, judged, b, depth).unwrap_or(0.0),
            // binarize_at >= 1 guarantees a positive grade exists; with 0 it may not.
            ndcg: ndcg(hits, judged, depth, settings.gain).unwrap_or(0.0),
            p10: precision_at(hits, judged, b, P_CUTOFF).unwrap_or(0.0),
            rr: reciprocal_rank(hits, judged, b, depth).unwrap_or(0.0),
        };
        per_query.insert(qid.clone(), metrics);
    }
    for qid in run.runs.keys().filter(|q| !qrels.judgments.contains_key(*q)) {
        excluded.push(ExcludedQuery {
            qid: qid.clone(),
            reason: "no judgments".into(),
        });
    }
    excluded.sort_by(|a, b| a.qid.cmp(&b.qid));

    let n = per_query.len();
    let mean = |f: fn(&QueryMetrics) -> f64| {
        if n == 0 {
            0.0
        } else {
            per_query.values().map(f).sum::<f64>() / n as f64
        }
    };
    let aggregate = Aggregate {
        num_queries: n,
        map: mean(|m| m.ap),
        recall: mean(|m| m.recall),
        ndcg: mean(|m| m.ndcg),
        p10: mean(|m| m.p10),
        mrr: mean(|m| m.rr),
    };
    Ok(EvalReport {
        run_tag: run.run_tag.clone(),
        settings: *settings,
        per_query,
        aggregate,
        excluded,
        missing_from_run,
    })
}
