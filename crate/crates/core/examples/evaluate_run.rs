//! Score a TREC run against graded qrels and test two systems for a difference.
//!
//! ```sh
//! cargo run --example evaluate_run [qrels] [run]
//! ```

use chronosearch::evalkit::{evaluate_run, load_qrels, load_run, paired_t_test, EvalSettings, Metric};

fn main() -> chronosearch::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/metric_oracle");
    let mut args = std::env::args().skip(1);
    let qrels = load_qrels(args.next().unwrap_or_else(|| format!("{dir}/qrels.txt")))?;
    let run = load_run(args.next().unwrap_or_else(|| format!("{dir}/run.txt")))?;

    let report = evaluate_run(&run, &qrels, &EvalSettings::default())?;
    report.write_csv(std::io::stdout()).expect("stdout");
    for e in &report.excluded {
        println!("excluded {}: {}", e.qid, e.reason);
    }

    // A second "system": the same run with the top two hits swapped per query.
    let mut swapped = run.clone();
    swapped.run_tag = "swapped".into();
    for hits in swapped.runs.values_mut() {
        if hits.len() > 1 {
            hits.swap(0, 1);
            hits[0].rank = 1;
            hits[1].rank = 2;
        }
    }
    let other = evaluate_run(&swapped, &qrels, &EvalSettings::default())?;
    for m in [Metric::Map, Metric::Mrr] {
        let a: Vec<f64> = report.values(m).iter().map(|v| v.1).collect();
        let b: Vec<f64> = other.values(m).iter().map(|v| v.1).collect();
        let t = paired_t_test(&a, &b)?;
        println!("{m}: t={:.4} df={} p={:.4} {:?}", t.t_statistic, t.df, t.p_value, t.note);
    }
    Ok(())
}
