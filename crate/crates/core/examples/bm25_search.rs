//! Build a non-fiction index, persist it, reload it and run a BM25 query.
//!
//! ```sh
//! cargo run --example bm25_search -- "sperm whale oil"
//! ```

use chronosearch::corpus::{build_passages, ingest_corpus, Genre, NormalizationConfig, Unit};
use chronosearch::index::{CollectionLabel, Index};
use chronosearch::retrieval::{idf, search, Bm25Params, Query};

fn main() -> chronosearch::Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "sperm whale oil".to_owned());
    let corpus = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus.jsonl");

    let cfg = NormalizationConfig::default();
    let (docs, _) = ingest_corpus(corpus, Some(Genre::NonFiction))?;
    let (passages, _) = build_passages(&docs, Unit::Paragraph, &cfg);
    let built = Index::build(&passages, CollectionLabel::NonFiction, Unit::Paragraph, cfg)?;

    let dir = std::env::temp_dir().join(format!("chronosearch-bm25-{}", std::process::id()));
    built.persist(&dir)?;
    let index = Index::load(&dir)?;
    assert_eq!(index.fingerprint(), built.fingerprint());
    let _ = std::fs::remove_dir_all(&dir);

    let stats = index.stats();
    println!("{} passages, avgdl {:.2}", stats.num_passages, stats.avgdl);

    let query = Query::analyze("q", &text, index.analysis());
    for t in &query.terms {
        println!("  {t:<12} df={:<3} idf={:.4}", index.df(t), idf(&index, t));
    }
    let result = search(&index, &query, 5, &Bm25Params::default())?;
    if result.unanswerable {
        println!("query has no terms after analysis");
    }
    for h in &result.hits {
        println!("{:>2}. {:<8} {:.4}", h.rank, h.passage_id, h.score);
    }
    Ok(())
}
