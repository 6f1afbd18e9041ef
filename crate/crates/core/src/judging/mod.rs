//! Building graded judgments: variant pooling, machine grading with cached
//! transcripts, seeded verification sampling and expert override.

pub mod assessor;
pub mod grading;
pub mod pool;
pub mod verify;

use std::collections::BTreeMap;

use crate::error::Result;
use crate::index::Index;
use crate::retrieval::Bm25Params;

pub use assessor::{
    transcript_key, AssessmentRequest, AssessorClient, CacheMode, CachingAssessor, HttpAssessor, NoRemote, Transcript,
    API_KEY_ENV, DEFAULT_INSTRUCTIONS,
};
pub use grading::{
    grade_pool, judgments_to_qrels, parse_grade, write_judgments_jsonl, AssessorKind, GradingOptions, GradingOutcome,
    Judgment, MissingGrade, QueuedJudgment,
};
pub use pool::{load_topics, parse_topics, pool_candidates, Pool, PoolSource, TopicSpec};
pub use verify::{
    finalize_qrels, resolve, sample_for_verification, sample_size, AgreementReport, DEFAULT_VERIFICATION_FRACTION,
};

/// Pool size per phrasing.
pub const DEFAULT_POOL_DEPTH: usize = 100;

/// Pool and machine-grade every topic. Output order is independent of scheduling.
#[allow(clippy::too_many_arguments)]
pub fn judge_topics(
    topics: &[TopicSpec],
    index: &Index,
    passage_texts: &BTreeMap<String, String>,
    client: &dyn AssessorClient,
    instructions: &str,
    pool_depth: usize,
    bm25: &Bm25Params,
    options: &GradingOptions,
) -> Result<(Vec<Pool>, GradingOutcome)> {
    let mut pools = Vec::with_capacity(topics.len());
    let mut outcome = GradingOutcome::default();
    for topic in topics {
        let pool = pool_candidates(topic, index, pool_depth, bm25)?;
        outcome.extend(grade_pool(&pool, topic, passage_texts, client, instructions, options)?);
        pools.push(pool);
    }
    Ok((pools, outcome))
}
