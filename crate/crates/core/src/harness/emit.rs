//! Text renderings of a benchmark report.

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::benchmark::{BenchmarkReport, SIGNIFICANCE_BASELINES};
use crate::evalkit::Metric;
use crate::feedback::{Policy, TermStatus};

pub const DEFAULT_TERM_LIMIT: usize = 20;

/// Mark for a significant improvement over `baseline`.
pub fn significance_mark(baseline: Policy) -> &'static str {
    match baseline {
        Policy::NonFictionBase => "*",
        _ => "†",
    }
}

/// Configs × metrics at 4 decimals. `*` marks a significant improvement over
/// NonFiction_base, `†` over NonFiction_RLM (paired t-test, p < 0.05).
pub fn emit_table(report: &BenchmarkReport) -> String {
    let mut rows: Vec<Vec<String>> = vec![std::iter::once("Configuration".to_owned())
        .chain(Metric::ALL.iter().map(|m| m.to_string()))
        .collect()];
    for c in &report.configs {
        let mut row = vec![c.config_id.to_string()];
        for m in Metric::ALL {
            let mut cell = format!("{:.4}", m.aggregate(&c.evaluation.aggregate));
            for b in SIGNIFICANCE_BASELINES {
                if report
                    .significance_for(b, c.config_id, m)
                    .is_some_and(|s| s.is_improvement())
                {
                    cell.push_str(significance_mark(b));
                }
            }
            row.push(cell);
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in &rows {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell}{}", " ".repeat(w - cell.chars().count())))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    for f in &report.failures {
        let _ = writeln!(out, "{}: failed: {}", f.config_id, f.error);
    }
    out
}

/// `qid,config,ap` for every evaluated query of every configuration.
pub fn emit_per_query(report: &BenchmarkReport) -> String {
    let mut out = String::from("qid,config,ap\n");
    let qids: BTreeSet<&str> = report
        .configs
        .iter()
        .flat_map(|c| c.evaluation.per_query.keys().map(String::as_str))
        .collect();
    for q in qids {
        for c in &report.configs {
            if let Some(m) = c.evaluation.per_query.get(q) {
                let _ = writeln!(out, "{q},{},{:.6}", c.config_id, m.ap);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRow {
    pub term: String,
    pub weight: f64,
    /// Also among the listed terms of every other column.
    pub common: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermColumn {
    pub config_id: Policy,
    pub terms: Vec<TermRow>,
}

/// Final expansion terms for one topic, heaviest first, `min(T, available, limit)` per config.
pub fn term_table(report: &BenchmarkReport, qid: &str, configs: &[Policy], limit: usize) -> Vec<TermColumn> {
    let mut columns: Vec<TermColumn> = configs
        .iter()
        .filter_map(|&p| {
            let c = report.config(p)?;
            let e = c.expansions.iter().find(|e| e.qid == qid)?;
            let mut kept: Vec<(&str, f64)> = e
                .terms
                .iter()
                .filter(|t| t.status == TermStatus::Kept)
                .map(|t| (t.term.as_str(), t.weight))
                .collect();
            kept.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
            kept.truncate(limit.min(e.params.fb_terms));
            Some(TermColumn {
                config_id: p,
                terms: kept
                    .into_iter()
                    .map(|(t, w)| TermRow {
                        term: t.to_owned(),
                        weight: w,
                        common: false,
                    })
                    .collect(),
            })
        })
        .collect();
    if columns.len() > 1 {
        let sets: Vec<BTreeSet<String>> = columns
            .iter()
            .map(|c| c.terms.iter().map(|t| t.term.clone()).collect())
            .collect();
        for col in &mut columns {
            for row in &mut col.terms {
                row.common = sets.iter().all(|s| s.contains(&row.term));
            }
        }
    }
    columns
}

/// Markdown rendering of [`term_table`]; common terms are bold.
pub fn emit_terms(report: &BenchmarkReport, qid: &str, configs: &[Policy]) -> String {
    let columns = term_table(report, qid, configs, DEFAULT_TERM_LIMIT);
    let mut out = String::new();
    let header: Vec<String> = columns.iter().map(|c| c.config_id.to_string()).collect();
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", " --- |".repeat(columns.len()));
    let depth = columns.iter().map(|c| c.terms.len()).max().unwrap_or(0);
    for i in 0..depth {
        let cells: Vec<String> = columns
            .iter()
            .map(|c| match c.terms.get(i) {
                Some(r) if r.common => format!("**{}** ({:.4})", r.term, r.weight),
                Some(r) => format!("{} ({:.4})", r.term, r.weight),
                None => String::new(),
            })
            .collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    out
}
