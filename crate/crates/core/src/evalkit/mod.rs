//! Qrels and run I/O, graded-relevance metrics, paired significance tests and
//! the `M × T` parameter sweep.

pub mod grid;
pub mod metrics;
pub mod report;
pub mod significance;
pub mod trec;

pub use grid::{grid_search, select_best, BestCell, Grid, GridCell, GridOutcome};
pub use metrics::{average_precision, ndcg, precision_at, recall_at, reciprocal_rank, Gain};
pub use report::{evaluate_run, Aggregate, EvalReport, EvalSettings, ExcludedQuery, Metric, QueryMetrics};
pub use significance::{paired_t_test, SignificanceResult, TTest, TTestNote, SIGNIFICANCE_LEVEL};
pub use trec::{load_qrels, load_run, parse_qrels, parse_run, QrelSet, RunFile, MAX_GRADE};
