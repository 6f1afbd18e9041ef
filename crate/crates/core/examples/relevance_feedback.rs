//! Walk through RM1 estimation, RM3 interpolation and truncation on one collection.
//!
//! ```sh
//! cargo run --example relevance_feedback -- "small pox"
//! ```

use chronosearch::corpus::{NormalizationConfig, Unit};
use chronosearch::feedback::{apply_rm3, estimate_rm1, truncate_renormalize, FeedbackParams};
use chronosearch::harness::build_collections;
use chronosearch::retrieval::{Bm25Params, Query};

fn main() -> chronosearch::Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "small pox".to_owned());
    let dir = env!("CARGO_MANIFEST_DIR");
    let cfg = NormalizationConfig::default().with_stopword_file(format!("{dir}/fixtures/stopwords.txt"))?;
    let built = build_collections(format!("{dir}/fixtures/corpus.jsonl"), Unit::Paragraph, &cfg)?;
    let index = &built.nonfiction;

    let params = FeedbackParams {
        fb_docs: 5,
        fb_terms: 10,
        ..Default::default()
    };
    let query = Query::analyze("q", &text, index.analysis());
    let rm1 = estimate_rm1(index, &query, &params, &Bm25Params::default())?;
    println!("RM1: {} candidate terms, total {:.12}", rm1.weights.len(), rm1.total());
    for (t, w) in rm1.ranked().into_iter().take(8) {
        println!("  {t:<14} {w:.6}");
    }

    for alpha in [0.0, params.alpha, 1.0] {
        let rm3 = apply_rm3(&rm1, &query, alpha);
        let top = truncate_renormalize(&rm3, params.fb_terms);
        let shown: Vec<String> = top.ranked().iter().take(5).map(|(t, w)| format!("{t}:{w:.3}")).collect();
        println!("alpha={alpha:<4} {}", shown.join(" "));
    }
    Ok(())
}
