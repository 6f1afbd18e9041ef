//! Sweep feedback passages (M) and expansion terms (T) for one configuration.
//!
//! ```sh
//! cargo run --release --example grid_sweep [Fiction_RLM]
//! ```

use chronosearch::corpus::{NormalizationConfig, Unit};
use chronosearch::evalkit::{load_qrels, Grid, Metric};
use chronosearch::feedback::{FeedbackParams, Policy};
use chronosearch::harness::{build_collections, run_grid, Benchmark, BenchmarkConfig, CollectionPaths};
use chronosearch::judging::load_topics;

fn main() -> chronosearch::Result<()> {
    let policy: Policy = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "Fiction_RLM".to_owned())
        .parse()
        .map_err(chronosearch::Error::InvalidParam)?;
    let dir = env!("CARGO_MANIFEST_DIR");
    let cfg = NormalizationConfig::default().with_stopword_file(format!("{dir}/fixtures/stopwords.txt"))?;
    let built = build_collections(format!("{dir}/fixtures/corpus.jsonl"), Unit::Paragraph, &cfg)?;
    let topics = format!("{dir}/fixtures/topics.jsonl");
    let qrels = format!("{dir}/fixtures/qrels.txt");
    let bench = Benchmark {
        config: BenchmarkConfig::all_policies(CollectionPaths::default(), topics.clone().into(), qrels.clone().into()),
        indexes: built.index_set()?,
        topics: load_topics(&topics)?,
        qrels: load_qrels(&qrels)?,
    };

    // The full grid is 10 × 11 cells. On the tiny fixture corpus each first pass
    // matches fewer than 10 passages, so the surface is flat; real collections
    // are where M and T matter.
    let grid = Grid::default();
    println!("{} cells", grid.cells().len());
    let outcome = run_grid(&bench, policy, FeedbackParams::default(), &grid, Metric::Map, None)?;

    print!("{:>5}", "M\\T");
    for t in &grid.t_values {
        print!("{t:>7}");
    }
    println!();
    for m in &grid.m_values {
        print!("{m:>5}");
        for t in &grid.t_values {
            let cell = outcome.cells.iter().find(|c| c.m == *m && c.t == *t).expect("cell");
            match &cell.aggregate {
                Some(a) => print!("{:>7.4}", a.map),
                None => print!("{:>7}", "err"),
            }
        }
        println!();
    }
    if let Some(b) = outcome.best {
        println!("best MAP {:.4} at M={} T={}", b.value, b.m, b.t);
    }
    Ok(())
}
