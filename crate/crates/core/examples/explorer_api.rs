//! Serve the read-only JSON API over the fixture collections.
//!
//! ```sh
//! cargo run --example explorer_api -- 8080
//! curl localhost:8080/collections
//! curl -XPOST localhost:8080/search -H 'content-type: application/json' \
//!      -d '{"query": "whale fishery", "policy": "Fiction_RLM", "M": 10, "T": 20, "depth": 5}'
//! ```

use std::net::SocketAddr;
use std::sync::Arc;

use chronosearch::corpus::{NormalizationConfig, Unit};
use chronosearch::evalkit::load_qrels;
use chronosearch::harness::{build_collections, serve_api, ApiState};
use chronosearch::judging::load_topics;

#[tokio::main]
async fn main() -> chronosearch::Result<()> {
    let port: u16 = std::env::args().nth(1).and_then(|p| p.parse().ok()).unwrap_or(8080);
    let dir = env!("CARGO_MANIFEST_DIR");
    let cfg = NormalizationConfig::default().with_stopword_file(format!("{dir}/fixtures/stopwords.txt"))?;
    let built = build_collections(format!("{dir}/fixtures/corpus.jsonl"), Unit::Paragraph, &cfg)?;
    let state = ApiState::new(
        built.index_set()?,
        load_topics(format!("{dir}/fixtures/topics.jsonl"))?,
        Some(load_qrels(format!("{dir}/fixtures/qrels.txt"))?),
    )
    .with_passage_texts(built.passage_texts());

    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    println!("listening on http://{addr}");
    serve_api(addr, Arc::new(state)).await
}
