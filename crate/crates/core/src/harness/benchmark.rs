use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Benchmark, ExperimentConfig};
use crate::error::{Error, Result};
use crate::evalkit::{
    evaluate_run, grid_search, paired_t_test, EvalReport, Grid, GridOutcome, Metric, RunFile, SignificanceResult,
};
use crate::feedback::{expand_or_fallback, write_expansion_tsv, Expansion, FeedbackParams, Fallback, IndexSet, Policy};
use crate::retrieval::{search, search_weighted, Bm25Params, SearchResult};

/// Baselines that get a significance column, in column order.
pub const SIGNIFICANCE_BASELINES: [Policy; 2] = [Policy::NonFictionBase, Policy::NonFictionRlm];

/// Rank one query under `policy`. Shared by batch runs and the HTTP API so both
/// return the same hits.
pub fn retrieve(
    policy: Policy,
    feedback: Option<&FeedbackParams>,
    qid: &str,
    text: &str,
    indexes: &IndexSet,
    bm25: &Bm25Params,
    depth: usize,
) -> Result<(SearchResult, Option<Expansion>)> {
    let query = indexes.analyze(qid, text)?;
    let target = indexes.get(policy.retrieval_target())?;
    let Some(transfer) = policy.transfer() else {
        return Ok((search(target, &query, depth, bm25)?, None));
    };
    let params = feedback.copied().unwrap_or_default();
    params.validate()?;
    for label in policy.required_collections() {
        indexes.get(label)?;
    }
    if !query.is_answerable() {
        return Ok((search(target, &query, depth, bm25)?, None));
    }
    let expansion = expand_or_fallback(&query, transfer, &params, indexes, bm25)?;
    let result = search_weighted(target, &expansion.query, depth, bm25)?;
    Ok((result, Some(expansion)))
}

/// Output of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRun {
    pub config_id: Policy,
    pub feedback: Option<FeedbackParams>,
    pub evaluation: EvalReport,
    /// Topics whose expansion fell back to the original query.
    pub fallbacks: BTreeMap<String, Fallback>,
    /// Topics with no terms after analysis.
    pub unanswerable: Vec<String>,
    #[serde(skip)]
    pub run: RunFile,
    #[serde(skip)]
    pub expansions: Vec<Expansion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigFailure {
    pub config_id: Policy,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedComparison {
    pub baseline: Policy,
    pub system: Policy,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_hash: String,
    /// Collection label → index fingerprint.
    pub index_fingerprints: BTreeMap<String, String>,
    pub bm25: Bm25Params,
    pub run_depth: usize,
    pub eval_depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub provenance: Provenance,
    pub configs: Vec<ConfigRun>,
    pub failures: Vec<ConfigFailure>,
    pub significance: Vec<SignificanceResult>,
    pub skipped_comparisons: Vec<SkippedComparison>,
}

impl BenchmarkReport {
    pub fn config(&self, id: Policy) -> Option<&ConfigRun> {
        self.configs.iter().find(|c| c.config_id == id)
    }

    pub fn significance_for(&self, baseline: Policy, system: Policy, metric: Metric) -> Option<&SignificanceResult> {
        self.significance
            .iter()
            .find(|s| s.baseline_tag == baseline.as_str() && s.system_tag == system.as_str() && s.metric == metric)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Write `report.json`, `table.txt`, `per_query_ap.csv`, and per config a
    /// TREC run file, a per-query metrics CSV and an expansion-term TSV.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, bytes: &[u8]| {
            let p = dir.join(name);
            fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
        };
        write("report.json", self.to_json().as_bytes())?;
        write("table.txt", super::emit::emit_table(self).as_bytes())?;
        write("per_query_ap.csv", super::emit::emit_per_query(self).as_bytes())?;
        for c in &self.configs {
            write(&format!("{}.run", c.config_id), c.run.to_trec_string().as_bytes())?;
            let mut csv = Vec::new();
            c.evaluation.write_csv(&mut csv).map_err(|e| Error::io(dir, e))?;
            write(&format!("{}.metrics.csv", c.config_id), &csv)?;
            if c.config_id.transfer().is_some() {
                let mut tsv = Vec::new();
                write_expansion_tsv(&mut tsv, &c.expansions).map_err(|e| Error::io(dir, e))?;
                write(&format!("{}.terms.tsv", c.config_id), &tsv)?;
            }
        }
        Ok(())
    }
}

/// Retrieve and evaluate every topic under one configuration.
pub fn run_config(bench: &Benchmark, exp: &ExperimentConfig) -> Result<ConfigRun> {
    exp.validate()?;
    let feedback = exp.effective_feedback();
    let cfg = &bench.config;
    let per_topic: Vec<Result<(String, SearchResult, Option<Expansion>)>> = bench
        .topics
        .par_iter()
        .map(|t| {
            let (res, exp) = retrieve(
                exp.config_id,
                feedback.as_ref(),
                &t.qid,
                &t.query,
                &bench.indexes,
                &cfg.bm25,
                cfg.depth,
            )?;
            Ok((t.qid.clone(), res, exp))
        })
        .collect();

    let mut run = RunFile::new(exp.config_id.as_str());
    let mut expansions = Vec::new();
    let mut fallbacks = BTreeMap::new();
    let mut unanswerable = Vec::new();
    for item in per_topic {
        let (qid, res, expansion) = item?;
        if res.unanswerable {
            unanswerable.push(qid.clone());
        }
        if !res.hits.is_empty() {
            run.runs.insert(qid.clone(), res.hits);
        }
        if let Some(e) = expansion {
            if let Some(f) = e.fallback {
                fallbacks.insert(qid, f);
            }
            expansions.push(e);
        }
    }
    unanswerable.sort();
    expansions.sort_by(|a, b| a.qid.cmp(&b.qid));
    let evaluation = evaluate_run(&run, &bench.qrels, &cfg.eval)?;
    Ok(ConfigRun {
        config_id: exp.config_id,
        feedback,
        evaluation,
        fallbacks,
        unanswerable,
        run,
        expansions,
    })
}

fn provenance(bench: &Benchmark) -> Provenance {
    Provenance {
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        config_hash: bench.config.hash(),
        index_fingerprints: bench
            .indexes
            .iter()
            .map(|i| (i.label().to_string(), i.fingerprint()))
            .collect(),
        bm25: bench.config.bm25,
        run_depth: bench.config.depth,
        eval_depth: bench.config.eval.depth,
        grid: None,
    }
}

/// Paired t-tests of every configuration against each available baseline, per
/// metric. Pairs whose evaluated query sets differ are skipped.
pub fn significance_matrix(configs: &[ConfigRun]) -> (Vec<SignificanceResult>, Vec<SkippedComparison>) {
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for baseline in SIGNIFICANCE_BASELINES {
        let Some(base) = configs.iter().find(|c| c.config_id == baseline) else { continue };
        for sys in configs.iter().filter(|c| c.config_id != baseline) {
            let base_q: Vec<&String> = base.evaluation.per_query.keys().collect();
            let sys_q: Vec<&String> = sys.evaluation.per_query.keys().collect();
            if base_q != sys_q {
                skipped.push(SkippedComparison {
                    baseline,
                    system: sys.config_id,
                    reason: "evaluated query sets differ".into(),
                });
                continue;
            }
            for metric in Metric::ALL {
                let a: Vec<f64> = sys.evaluation.values(metric).into_iter().map(|(_, v)| v).collect();
                let b: Vec<f64> = base.evaluation.values(metric).into_iter().map(|(_, v)| v).collect();
                match paired_t_test(&a, &b) {
                    Ok(t) => results.push(SignificanceResult::new(baseline.as_str(), sys.config_id.as_str(), metric, &t)),
                    Err(e) => {
                        skipped.push(SkippedComparison {
                            baseline,
                            system: sys.config_id,
                            reason: e.to_string(),
                        });
                        break;
                    }
                }
            }
        }
    }
    (results, skipped)
}

/// Run every configured experiment. A failing configuration is recorded and
/// the rest still complete.
pub fn run_benchmark(bench: &Benchmark) -> Result<BenchmarkReport> {
    bench.config.validate()?;
    let mut configs = Vec::new();
    let mut failures = Vec::new();
    for exp in &bench.config.experiments {
        match run_config(bench, exp) {
            Ok(c) => configs.push(c),
            Err(e) => failures.push(ConfigFailure {
                config_id: exp.config_id,
                error: e.to_string(),
            }),
        }
    }
    let (significance, skipped_comparisons) = significance_matrix(&configs);
    Ok(BenchmarkReport {
        provenance: provenance(bench),
        configs,
        failures,
        significance,
        skipped_comparisons,
    })
}

/// Sweep `M × T` for one expanding configuration, keeping its alpha and mu.
pub fn run_grid(
    bench: &Benchmark,
    policy: Policy,
    base: FeedbackParams,
    grid: &Grid,
    objective: Metric,
    workers: Option<usize>,
) -> Result<GridOutcome> {
    if policy.transfer().is_none() {
        return Err(Error::Config(format!("{policy} has no feedback parameters to sweep")));
    }
    grid_search(grid, objective, workers, |m, t| {
        let params = FeedbackParams {
            fb_docs: m,
            fb_terms: t,
            ..base
        };
        run_config(bench, &ExperimentConfig::new(policy, Some(params))).map(|c| c.evaluation)
    })
}
