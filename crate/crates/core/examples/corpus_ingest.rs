//! Ingest a JSON Lines corpus, normalize it and split it into paragraphs.
//!
//! ```sh
//! cargo run --example corpus_ingest [corpus.jsonl]
//! ```

use chronosearch::corpus::{build_passages, ingest_corpus, normalize, partition_by_genre, NormalizationConfig, Unit};

fn main() -> chronosearch::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus.jsonl").to_owned());

    let cfg = NormalizationConfig::default();
    println!("{:?}", normalize("The Whale-\nfiſhery, Mr. Starbuck's boat!", &cfg));

    let (docs, report) = ingest_corpus(&path, None)?;
    println!(
        "read {} records: {} accepted, {} rejected, {} warnings",
        report.read,
        report.accepted,
        report.errors.len(),
        report.warnings.len()
    );
    for e in &report.errors {
        println!("  line {}: {}", e.line, e.reason);
    }

    let (passages, _) = build_passages(&docs, Unit::Paragraph, &cfg);
    let (fiction, nonfiction) = partition_by_genre(passages);
    println!("{} fiction passages, {} non-fiction passages", fiction.len(), nonfiction.len());
    if let Some(p) = nonfiction.first() {
        println!("{} ({} tokens): {}", p.passage_id, p.len(), p.tokens.join(" "));
    }
    Ok(())
}
