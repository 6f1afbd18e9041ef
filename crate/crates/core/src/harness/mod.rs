//! Running the four configurations end to end, rendering reports, and the
//! read-only HTTP API behind the explorer.

pub mod api;
pub mod benchmark;
pub mod config;
pub mod emit;

pub use api::{router, serve_api, ApiState};
pub use benchmark::{
    retrieve, run_benchmark, run_config, run_grid, significance_matrix, BenchmarkReport, ConfigFailure, ConfigRun,
    Provenance, SkippedComparison, SIGNIFICANCE_BASELINES,
};
pub use config::{build_collections, load_indexes, BuiltCollections, Benchmark, BenchmarkConfig, CollectionPaths, ExperimentConfig, DEFAULT_RUN_DEPTH};
pub use emit::{emit_per_query, emit_table, emit_terms, significance_mark, term_table, TermColumn, TermRow};
