//! Pool candidates with query variants, grade them with a cached assessor,
//! replay the cache offline, sample for verification and apply expert grades.
//!
//! A keyword-counting stand-in plays the machine assessor so the example runs
//! offline. Swap in `HttpAssessor::from_env(endpoint, model)` for a real one.
//!
//! ```sh
//! cargo run --example judging_pipeline
//! ```

use chronosearch::corpus::{NormalizationConfig, Unit};
use chronosearch::evalkit::QrelSet;
use chronosearch::harness::build_collections;
use chronosearch::judging::{
    finalize_qrels, judge_topics, load_topics, sample_for_verification, AssessmentRequest, AssessorClient,
    CachingAssessor, GradingOptions, DEFAULT_INSTRUCTIONS, DEFAULT_POOL_DEPTH, DEFAULT_VERIFICATION_FRACTION,
};
use chronosearch::retrieval::Bm25Params;

/// Grades by how many query words the passage repeats.
struct KeywordAssessor;

impl AssessorClient for KeywordAssessor {
    fn submit(&self, r: &AssessmentRequest) -> chronosearch::Result<String> {
        let text = r.passage_text.to_lowercase();
        let hits = r.query.split_whitespace().filter(|w| text.contains(&w.to_lowercase())).count();
        Ok(format!("Grade: {} - {hits} query words present", hits.min(4)))
    }
}

fn main() -> chronosearch::Result<()> {
    let dir = env!("CARGO_MANIFEST_DIR");
    let cfg = NormalizationConfig::default().with_stopword_file(format!("{dir}/fixtures/stopwords.txt"))?;
    let built = build_collections(format!("{dir}/fixtures/corpus.jsonl"), Unit::Paragraph, &cfg)?;
    let texts = built.passage_texts();
    let topics = load_topics(format!("{dir}/fixtures/topics.jsonl"))?;
    let cache = tempfile_dir();
    let bm25 = Bm25Params::default();
    let opts = GradingOptions::default();

    let recorder = CachingAssessor::record(KeywordAssessor, &cache, "keyword-v1")?;
    let (pools, first) = judge_topics(&topics, &built.nonfiction, &texts, &recorder, DEFAULT_INSTRUCTIONS, DEFAULT_POOL_DEPTH, &bm25, &opts)?;
    for p in &pools {
        println!("{}: pooled {} passages", p.qid, p.len());
    }
    println!("recorded {} transcripts", recorder.remote_calls());

    let replay = CachingAssessor::replay(&cache, "keyword-v1")?;
    let (_, second) = judge_topics(&topics, &built.nonfiction, &texts, &replay, DEFAULT_INSTRUCTIONS, DEFAULT_POOL_DEPTH, &bm25, &opts)?;
    let a = first.to_qrels()?.to_trec_string();
    let b = second.to_qrels()?.to_trec_string();
    println!("replay identical: {}, remote calls during replay: {}", a == b, replay.remote_calls());

    let sample = sample_for_verification(&first.judgments, DEFAULT_VERIFICATION_FRACTION, 2024)?;
    println!("verifying {} of {} judgments", sample.len(), first.judgments.len());

    // Pretend the expert lowers every machine 4 to a 3.
    let mut expert = QrelSet::default();
    for j in &sample {
        expert.insert(&j.qid, &j.passage_id, j.grade.min(3))?;
    }
    let (final_qrels, agreement) = finalize_qrels(&first.judgments, &expert, DEFAULT_VERIFICATION_FRACTION, sample.len())?;
    println!("{}", serde_json::to_string_pretty(&agreement)?);
    println!("final qrels: {} judgments", final_qrels.len());
    let _ = std::fs::remove_dir_all(&cache);
    Ok(())
}

fn tempfile_dir() -> std::path::PathBuf {
    std::env::temp_dir().join(format!("chronosearch-transcripts-{}", std::process::id()))
}
