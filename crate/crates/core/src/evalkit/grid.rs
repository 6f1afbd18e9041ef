//! Exhaustive sweep over feedback-passage count `M` and expansion-term count `T`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{Aggregate, EvalReport, Metric};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub m_values: Vec<usize>,
    pub t_values: Vec<usize>,
}

impl Default for Grid {
    /// M ∈ {10, 20, …, 100}, T ∈ {20, 30, …, 120}.
    fn default() -> Self {
        Self {
            m_values: (10..=100).step_by(10).collect(),
            t_values: (20..=120).step_by(10).collect(),
        }
    }
}

impl Grid {
    pub fn new(m_values: Vec<usize>, t_values: Vec<usize>) -> Self {
        Self { m_values, t_values }
    }

    /// Cells in `(M, T)` order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut ms = self.m_values.clone();
        let mut ts = self.t_values.clone();
        ms.sort_unstable();
        ms.dedup();
        ts.sort_unstable();
        ts.dedup();
        ms.iter().flat_map(|&m| ts.iter().map(move |&t| (m, t))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub aggregate: Option<Aggregate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub objective: Metric,
    pub cells: Vec<GridCell>,
    pub best: Option<BestCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestCell {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub value: f64,
}

impl GridOutcome {
    pub fn failed(&self) -> impl Iterator<Item = &GridCell> {
        self.cells.iter().filter(|c| c.error.is_some())
    }

    /// `M,T,metric,value`, one row per metric per successful cell.
    pub fn write_surface_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "M,T,metric,value")?;
        for c in &self.cells {
            if let Some(a) = &c.aggregate {
                for m in Metric::ALL {
                    writeln!(out, "{},{},{},{:.6}", c.m, c.t, m, m.aggregate(a))?;
                }
            }
        }
        Ok(())
    }
}

/// Pick the cell maximizing `objective`; ties go to smaller `M`, then smaller `T`.
pub fn select_best(cells: &[GridCell], objective: Metric) -> Option<BestCell> {
    let mut sorted: Vec<&GridCell> = cells.iter().collect();
    sorted.sort_by_key(|c| (c.m, c.t));
    let mut best: Option<BestCell> = None;
    for c in sorted {
        let Some(a) = &c.aggregate else { continue };
        let value = objective.aggregate(a);
        if best.is_none_or(|b| value > b.value) {
            best = Some(BestCell { m: c.m, t: c.t, value });
        }
    }
    best
}

/// Evaluate every cell of `grid` with `evaluate`, on `workers` threads when given.
///
/// A failing cell is recorded and does not stop the sweep.
pub fn grid_search<F>(grid: &Grid, objective: Metric, workers: Option<usize>, evaluate: F) -> Result<GridOutcome>
where
    F: Fn(usize, usize) -> Result<EvalReport> + Sync,
{
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(Error::InvalidParam("grid has no cells".into()));
    }
    let run = || -> Vec<GridCell> {
        cells
            .par_iter()
            .map(|&(m, t)| match evaluate(m, t) {
                Ok(report) => GridCell {
                    m,
                    t,
                    aggregate: Some(report.aggregate),
                    error: None,
                },
                Err(e) => GridCell {
                    m,
                    t,
                    aggregate: None,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    };
    let cells = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let best = select_best(&cells, objective);
    Ok(GridOutcome {
        objective,
        cells,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalkit::report::EvalSettings;
    use std::collections::BTreeMap;

    fn report_with_map(map: f64) -> EvalReport {
        EvalReport {
            run_tag: "t".into(),
            settings: EvalSettings::default(),
            per_query: BTreeMap::new(),
            aggregate: Aggregate {
                num_queries: 1,
                map,
                ..Default::default()
            },
            excluded: Vec::new(),
            missing_from_run: Vec::new(),
        }
    }

    #[test]
    fn default_grid_has_110_cells() {
        let g = Grid::default();
        assert_eq!(g.m_values, [10, 20, 30, 40, 50, 60, 70, 80, 90, 100]);
        assert_eq!(g.t_values, [20, 30, 40, 50, 60, 70, 80, 90, 100, 110, 120]);
        assert_eq!(g.cells().len(), 110);
    }

    #[test]
    fn single_cell() {
        let out = grid_search(&Grid::new(vec![30], vec![50]), Metric::Map, None, |_, _| Ok(report_with_map(0.3))).unwrap();
        assert_eq!(out.best, Some(BestCell { m: 30, t: 50, value: 0.3 }));
    }

    #[test]
    fn ties_prefer_smaller_m_then_t() {
        let out = grid_search(&Grid::new(vec![20, 10], vec![40, 30]), Metric::Map, Some(2), |m, t| {
            Ok(report_with_map(if m == 10 && t == 30 { 0.4 } else if t == 40 { 0.5 } else { 0.1 }))
        })
        .unwrap();
        assert_eq!(out.best.map(|b| (b.m, b.t)), Some((10, 40)));
    }

    #[test]
    fn failures_are_recorded() {
        let out = grid_search(&Grid::new(vec![10, 20], vec![20]), Metric::Map, None, |m, _| {
            if m == 10 {
                Err(Error::NoFeedbackDocuments)
            } else {
                Ok(report_with_map(0.2))
            }
        })
        .unwrap();
        assert_eq!(out.failed().count(), 1);
        assert_eq!(out.best.map(|b| b.m), Some(20));
        let mut csv = Vec::new();
        out.write_surface_csv(&mut csv).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert!(csv.starts_with("M,T,metric,value\n20,20,MAP,0.200000\n"));
        assert_eq!(csv.lines().count(), 6);
    }
}
