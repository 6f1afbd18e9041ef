//! Compare expansions estimated on non-fiction, fiction and the merged collection,
//! showing which fiction terms the non-fiction vocabulary filter removes.
//!
//! ```sh
//! cargo run --example cross_genre_transfer -- "whale fishery"
//! ```

use chronosearch::corpus::{NormalizationConfig, Unit};
use chronosearch::feedback::{expand_or_fallback, FeedbackParams, Policy, TermStatus};
use chronosearch::harness::build_collections;
use chronosearch::retrieval::{search_weighted, Bm25Params};

fn main() -> chronosearch::Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "whale fishery".to_owned());
    let dir = env!("CARGO_MANIFEST_DIR");
    let cfg = NormalizationConfig::default().with_stopword_file(format!("{dir}/fixtures/stopwords.txt"))?;
    let indexes = build_collections(format!("{dir}/fixtures/corpus.jsonl"), Unit::Paragraph, &cfg)?.index_set()?;
    let bm25 = Bm25Params::default();
    let params = FeedbackParams {
        fb_docs: 5,
        fb_terms: 15,
        ..Default::default()
    };
    let query = indexes.analyze("q", &text)?;
    println!("terms in pre-filter order; kept terms show their final weight, filtered ones the weight they lost");

    for policy in [Policy::NonFictionRlm, Policy::FictionRlm, Policy::FictionNonFictionRlm] {
        let transfer = policy.transfer().expect("expanding policy");
        let e = expand_or_fallback(&query, transfer, &params, &indexes, &bm25)?;
        println!("\n{policy} (feedback from {})", transfer.feedback_source);
        if let Some(f) = e.fallback {
            println!("  fell back to the original query: {f:?}");
        }
        for t in &e.terms {
            let mark = if t.status == TermStatus::Filtered { "  [filtered]" } else { "" };
            println!("  {:<14} {:.4}{mark}", t.term, t.weight);
        }
        let hits = search_weighted(indexes.get(transfer.retrieval_target)?, &e.query, 3, &bm25)?;
        let ids: Vec<&str> = hits.hits.iter().map(|h| h.passage_id.as_str()).collect();
        println!("  top hits: {}", ids.join(", "));
    }
    Ok(())
}
