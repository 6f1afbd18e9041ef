//! Fixture helpers and independent reference implementations.
//!
//! The oracles here work from raw token lists and never touch the index, so
//! agreement with the library is evidence rather than tautology.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chronosearch::corpus::{Genre, NormalizationConfig, Passage, Unit};
use chronosearch::evalkit::load_qrels;
use chronosearch::harness::{build_collections, Benchmark, BenchmarkConfig, BuiltCollections, CollectionPaths};
use chronosearch::index::{CollectionLabel, Index};
use chronosearch::judging::load_topics;

pub fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn analysis() -> NormalizationConfig {
    NormalizationConfig::default()
        .with_stopword_file(fixture("stopwords.txt"))
        .expect("stopword fixture")
}

pub fn collections() -> BuiltCollections {
    build_collections(fixture("corpus.jsonl"), Unit::Paragraph, &analysis()).expect("fixture corpus builds")
}

/// The fixture benchmark with all four configurations at default parameters.
pub fn benchmark() -> Benchmark {
    let built = collections();
    let config = BenchmarkConfig::all_policies(
        CollectionPaths::default(),
        fixture("topics.jsonl").into(),
        fixture("qrels.txt").into(),
    );
    Benchmark {
        config,
        indexes: built.index_set().unwrap(),
        topics: load_topics(fixture("topics.jsonl")).unwrap(),
        qrels: load_qrels(fixture("qrels.txt")).unwrap(),
    }
}

pub fn passage(id: &str, genre: Genre, tokens: &[&str]) -> Passage {
    Passage {
        passage_id: id.to_owned(),
        doc_id: id.split('#').next().unwrap().to_owned(),
        genre,
        tokens: tokens.iter().map(|s| s.to_string()).collect(),
        text: tokens.join(" "),
    }
}

pub fn index_of(passages: &[Passage], label: CollectionLabel) -> Index {
    Index::build(passages, label, Unit::Paragraph, NormalizationConfig::default()).unwrap()
}

fn count(tokens: &[String], term: &str) -> usize {
    tokens.iter().filter(|t| *t == term).count()
}

/// BM25 of every passage for `query` (duplicates counted per occurrence), by direct formula.
pub fn bm25_scores(docs: &[Vec<String>], query: &[String], k1: f64, b: f64) -> Vec<f64> {
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(Vec::len).sum::<usize>() as f64 / n;
    docs.iter()
        .map(|d| {
            let dl = d.len() as f64;
            let mut s = 0.0;
            for q in query {
                let df = docs.iter().filter(|x| x.contains(q)).count() as f64;
                let tf = count(d, q) as f64;
                if tf == 0.0 {
                    continue;
                }
                let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
            }
            s
        })
        .collect()
}

/// Score-and-sort: positive scores only, descending, ties by id ascending, top `k`.
pub fn brute_force_rank(ids: &[String], scores: &[f64], k: usize) -> Vec<(String, f64)> {
    let mut v: Vec<(String, f64)> = ids
        .iter()
        .cloned()
        .zip(scores.iter().copied())
        .filter(|(_, s)| *s > 0.0)
        .collect();
    v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    v.truncate(k);
    v
}

/// RM1 by exhaustive enumeration over the feedback passages.
///
/// `collection` is every passage of the feedback collection; `feedback` indexes
/// into it. Candidates are the terms of the feedback passages; query terms with
/// zero collection frequency are left out of the likelihood product.
pub fn rm1(collection: &[Vec<String>], feedback: &[usize], query: &[String], mu: f64) -> BTreeMap<String, f64> {
    let clen = collection.iter().map(Vec::len).sum::<usize>() as f64;
    let cf = |t: &str| collection.iter().map(|d| count(d, t)).sum::<usize>() as f64;
    let p = |t: &str, d: &Vec<String>| (count(d, t) as f64 + mu * cf(t) / clen) / (d.len() as f64 + mu);
    let likelihood: Vec<f64> = feedback
        .iter()
        .map(|&i| {
            query
                .iter()
                .filter(|q| cf(q) > 0.0)
                .map(|q| p(q, &collection[i]))
                .product()
        })
        .collect();
    let candidates: BTreeSet<&String> = feedback.iter().flat_map(|&i| collection[i].iter()).collect();
    let mut weights: BTreeMap<String, f64> = candidates
        .into_iter()
        .map(|w| {
            let s: f64 = feedback
                .iter()
                .zip(&likelihood)
                .map(|(&i, l)| p(w, &collection[i]) * l)
                .sum();
            (w.clone(), s)
        })
        .collect();
    let total: f64 = weights.values().sum();
    for v in weights.values_mut() {
        *v /= total;
    }
    weights
}

/// `alpha · MLE + (1 − alpha) · rm1`, normalized, zeros dropped.
pub fn rm3(rm1: &BTreeMap<String, f64>, query: &[String], alpha: f64) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = rm1.iter().map(|(t, w)| (t.clone(), (1.0 - alpha) * w)).collect();
    for q in query {
        *out.entry(q.clone()).or_default() += alpha / query.len() as f64;
    }
    out.retain(|_, w| *w > 0.0);
    let total: f64 = out.values().sum();
    out.values_mut().for_each(|w| *w /= total);
    out
}

/// Top `t` by weight (ties: smaller term), renormalized.
pub fn truncate(model: &BTreeMap<String, f64>, t: usize) -> BTreeMap<String, f64> {
    let mut v: Vec<(&String, &f64)> = model.iter().collect();
    v.sort_by(|a, b| b.1.partial_cmp(a.1).unwrap().then_with(|| a.0.cmp(b.0)));
    v.truncate(t);
    let total: f64 = v.iter().map(|x| x.1).sum();
    v.into_iter().map(|(k, w)| (k.clone(), w / total)).collect()
}

/// Keep terms in `vocab`, renormalized; `None` if nothing survives.
pub fn filter(model: &BTreeMap<String, f64>, vocab: &BTreeSet<String>) -> Option<BTreeMap<String, f64>> {
    let kept: BTreeMap<String, f64> = model
        .iter()
        .filter(|(t, _)| vocab.contains(*t))
        .map(|(t, w)| (t.clone(), *w))
        .collect();
    let total: f64 = kept.values().sum();
    (!kept.is_empty()).then(|| kept.into_iter().map(|(t, w)| (t, w / total)).collect())
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7, n = 9.
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Two-sided Student-t p-value by Simpson integration of the density on [0, |t|].
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    let norm = (ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0)).exp() / (df * std::f64::consts::PI).sqrt();
    let f = |x: f64| norm * (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
    let n = 20_000;
    let h = t.abs() / n as f64;
    let mut s = f(0.0) + f(t.abs());
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * s * h / 3.0
}

/// Paired t statistic computed from scratch.
pub fn paired_t(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    (mean / (sd / n.sqrt()), n - 1.0)
}

/// Deterministic stand-in for a remote assessor. Grades depend only on the
/// request; one passage in seven answers without a usable grade.
#[derive(Default)]
pub struct FakeAssessor {
    pub calls: std::sync::atomic::AtomicUsize,
}

impl chronosearch::judging::AssessorClient for FakeAssessor {
    fn submit(&self, r: &chronosearch::judging::AssessmentRequest) -> chronosearch::Result<String> {
        self.calls.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        let h = r.passage_id.bytes().chain(r.qid.bytes()).fold(7u32, |a, b| a.wrapping_mul(31).wrapping_add(b.into()));
        Ok(if h % 7 == 0 {
            "I cannot decide.".to_owned()
        } else {
            format!("Grade: {}\nshares {} query words", h % 5, r.query.split_whitespace().count())
        })
    }
}

/// Check `lib` against a brute-force ranking, treating scores within `tol` as tied.
///
/// Every position must carry the oracle's score, every returned id must really
/// have that score, and no id may repeat.
pub fn rank_equivalent(
    lib: &[(String, f64)],
    ids: &[String],
    scores: &[f64],
    oracle: &[(String, f64)],
    tol: f64,
) -> Result<(), String> {
    if lib.len() != oracle.len() {
        return Err(format!("{} hits vs {}", lib.len(), oracle.len()));
    }
    let truth: BTreeMap<&str, f64> = ids.iter().map(String::as_str).zip(scores.iter().copied()).collect();
    let mut seen = BTreeSet::new();
    for (i, ((id, s), (oid, os))) in lib.iter().zip(oracle).enumerate() {
        if (s - os).abs() > tol {
            return Err(format!("rank {}: score {s} vs {os} ({id} vs {oid})", i + 1));
        }
        let t = truth.get(id.as_str()).ok_or(format!("unknown id {id}"))?;
        if (t - os).abs() > tol {
            return Err(format!("rank {}: {id} scores {t}, expected {os} ({oid})", i + 1));
        }
        if !seen.insert(id.as_str()) {
            return Err(format!("{id} returned twice"));
        }
    }
    Ok(())
}
