//! Run the four configurations on the fixture corpus and print the comparison
//! table, per-query AP and the expansion terms for one topic.
//!
//! ```sh
//! cargo run --example benchmark [output-dir]
//! ```

use chronosearch::corpus::{NormalizationConfig, Unit};
use chronosearch::evalkit::load_qrels;
use chronosearch::feedback::{FeedbackParams, Policy};
use chronosearch::harness::{
    build_collections, emit_per_query, emit_table, emit_terms, run_benchmark, Benchmark, BenchmarkConfig,
    CollectionPaths, ExperimentConfig,
};
use chronosearch::judging::load_topics;

fn main() -> chronosearch::Result<()> {
    let dir = env!("CARGO_MANIFEST_DIR");
    let cfg = NormalizationConfig::default().with_stopword_file(format!("{dir}/fixtures/stopwords.txt"))?;
    let built = build_collections(format!("{dir}/fixtures/corpus.jsonl"), Unit::Paragraph, &cfg)?;
    let topics = format!("{dir}/fixtures/topics.jsonl");
    let qrels = format!("{dir}/fixtures/qrels.txt");

    let mut config = BenchmarkConfig::all_policies(CollectionPaths::default(), topics.clone().into(), qrels.clone().into());
    let params = FeedbackParams {
        fb_docs: 10,
        fb_terms: 20,
        ..Default::default()
    };
    config.experiments = Policy::ALL
        .iter()
        .map(|&p| ExperimentConfig::new(p, p.transfer().map(|_| params)))
        .collect();
    let bench = Benchmark {
        config,
        indexes: built.index_set()?,
        topics: load_topics(&topics)?,
        qrels: load_qrels(&qrels)?,
    };

    let report = run_benchmark(&bench)?;
    print!("{}", emit_table(&report));
    println!("\n{}", emit_per_query(&report));
    print!("{}", emit_terms(&report, "t02", &[Policy::NonFictionRlm, Policy::FictionRlm]));

    if let Some(out) = std::env::args().nth(1) {
        report.write_to(&out)?;
        println!("\nwrote {out}");
    }
    Ok(())
}
