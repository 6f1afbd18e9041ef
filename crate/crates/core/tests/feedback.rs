mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use chronosearch::corpus::Genre;
use chronosearch::feedback::{
    apply_rm3, estimate_rm1, expand_or_fallback, expand_query, Fallback, FeedbackParams, IndexSet, Policy, TermStatus,
};
use chronosearch::harness::{run_config, ExperimentConfig};
use chronosearch::index::{CollectionLabel, Index};
use chronosearch::retrieval::{Bm25Params, Query};

use common::{bm25_scores, brute_force_rank, filter, index_of, passage, rm1, rm3, truncate};

fn tokens_of(built: &chronosearch::harness::BuiltCollections, genre: Genre) -> (Vec<String>, Vec<Vec<String>>) {
    built
        .passages
        .iter()
        .filter(|p| p.genre == genre)
        .map(|p| (p.passage_id.clone(), p.tokens.clone()))
        .unzip()
}

fn assert_close(lib: &BTreeMap<String, f64>, oracle: &BTreeMap<String, f64>, tol: f64, what: &str) {
    assert_eq!(
        lib.keys().collect::<Vec<_>>(),
        oracle.keys().collect::<Vec<_>>(),
        "{what}: term sets differ"
    );
    for (t, w) in oracle {
        assert!((lib[t] - w).abs() <= tol, "{what}: {t} lib {} oracle {w}", lib[t]);
    }
}

#[test]
fn rm1_matches_exhaustive_enumeration() {
    let built = common::collections();
    let (ids, docs) = tokens_of(&built, Genre::NonFiction);
    assert_eq!(docs.len(), 30);
    let params = FeedbackParams::default();
    for topic in chronosearch::judging::load_topics(common::fixture("topics.jsonl")).unwrap() {
        let q = Query::analyze(&topic.qid, &topic.query, built.nonfiction.analysis());
        let ranked = brute_force_rank(&ids, &bm25_scores(&docs, &q.terms, 1.2, 0.75), params.fb_docs);
        if ranked.is_empty() {
            continue;
        }
        let fb: Vec<usize> = ranked.iter().map(|(id, _)| ids.iter().position(|x| x == id).unwrap()).collect();
        let oracle = rm1(&docs, &fb, &q.terms, params.mu);
        let lib = estimate_rm1(&built.nonfiction, &q, &params, &Bm25Params::default()).unwrap();
        assert_close(&lib.weights, &oracle, 1e-12, &topic.qid);
        assert!((lib.total() - 1.0).abs() <= 1e-9);

        for alpha in [0.0, 0.3, 0.5, 1.0] {
            let lib3 = apply_rm3(&lib, &q, alpha);
            let oracle3 = rm3(&oracle, &q.terms, alpha);
            assert_close(&lib3.weights, &oracle3, 1e-12, &format!("{} alpha={alpha}", topic.qid));
            assert!((lib3.total() - 1.0).abs() <= 1e-9);
        }
        // alpha = 0 is RM1 itself; alpha = 1 is the query model alone.
        assert_close(&apply_rm3(&lib, &q, 0.0).weights, &oracle, 1e-12, "alpha=0");
        let mle: BTreeSet<&String> = q.terms.iter().collect();
        assert_eq!(apply_rm3(&lib, &q, 1.0).weights.keys().collect::<BTreeSet<_>>(), mle);
    }
}

/// A small two-genre collection where the fiction vocabulary overlaps the
/// non-fiction one only partly.
fn transfer_fixture() -> (Vec<chronosearch::corpus::Passage>, Vec<chronosearch::corpus::Passage>) {
    let fic = vec![
        passage("f1#0", Genre::Fiction, &["ghost", "lantern", "moor", "ghost", "night"]),
        passage("f2#0", Genre::Fiction, &["lantern", "inn", "coach", "night"]),
        passage("f3#0", Genre::Fiction, &["orphan", "workhouse", "gruel"]),
    ];
    let non = vec![
        passage("n1#0", Genre::NonFiction, &["lantern", "gas", "street", "night"]),
        passage("n2#0", Genre::NonFiction, &["workhouse", "poor", "law"]),
        passage("n3#0", Genre::NonFiction, &["coach", "road", "turnpike", "inn"]),
    ];
    (fic, non)
}

fn vocab(docs: &[chronosearch::corpus::Passage]) -> BTreeSet<String> {
    docs.iter().flat_map(|p| p.tokens.iter().cloned()).collect()
}

#[test]
fn fiction_rlm_trace_matches_stagewise_oracle() {
    let (fic, non) = transfer_fixture();
    let indexes = IndexSet::new([
        Arc::new(index_of(&fic, CollectionLabel::Fiction)),
        Arc::new(index_of(&non, CollectionLabel::NonFiction)),
    ])
    .unwrap();
    let q = Query {
        qid: "q".into(),
        text: "ghost lantern".into(),
        terms: vec!["ghost".into(), "lantern".into()],
    };
    let params = FeedbackParams {
        fb_docs: 2,
        fb_terms: 5,
        alpha: 0.5,
        mu: 10.0,
    };
    let policy = Policy::FictionRlm.transfer().unwrap();
    let exp = expand_query(&q, policy, &params, &indexes, &Bm25Params::default()).unwrap();
    let st = exp.stages.as_ref().unwrap();

    let ids: Vec<String> = fic.iter().map(|p| p.passage_id.clone()).collect();
    let docs: Vec<Vec<String>> = fic.iter().map(|p| p.tokens.clone()).collect();
    let first = brute_force_rank(&ids, &bm25_scores(&docs, &q.terms, 1.2, 0.75), 2);
    let fb_ids: Vec<String> = first.iter().map(|x| x.0.clone()).collect();
    assert_eq!(st.feedback_passages, fb_ids);
    assert_eq!(fb_ids, ["f1#0", "f2#0"]);

    let fb: Vec<usize> = fb_ids.iter().map(|id| ids.iter().position(|x| x == id).unwrap()).collect();
    let o1 = rm1(&docs, &fb, &q.terms, params.mu);
    assert_close(&st.rm1.weights, &o1, 1e-12, "rm1");
    let o3 = rm3(&o1, &q.terms, params.alpha);
    assert_close(&st.rm3.weights, &o3, 1e-12, "rm3");
    let ot = truncate(&o3, params.fb_terms);
    assert_close(&st.truncated.weights, &ot, 1e-12, "truncated");
    let of = filter(&ot, &vocab(&non)).unwrap();
    assert_close(&st.filter.model.as_ref().unwrap().weights, &of, 1e-12, "filtered");
    assert_close(&exp.query.weights, &of, 1e-12, "final query");

    // "ghost" and "moor" are fiction-only and must be reported as filtered.
    let filtered: BTreeSet<&str> = exp
        .terms
        .iter()
        .filter(|t| t.status == TermStatus::Filtered)
        .map(|t| t.term.as_str())
        .collect();
    let expected: BTreeSet<&str> = ot.keys().filter(|t| !vocab(&non).contains(*t)).map(String::as_str).collect();
    assert_eq!(filtered, expected);
    assert!(filtered.contains("ghost"));
}

#[test]
fn no_survivors_falls_back_to_original_query() {
    let fic = vec![passage("f1#0", Genre::Fiction, &["ghost", "moor"])];
    let non = vec![passage("n1#0", Genre::NonFiction, &["lantern", "gas"])];
    let indexes = IndexSet::new([
        Arc::new(index_of(&fic, CollectionLabel::Fiction)),
        Arc::new(index_of(&non, CollectionLabel::NonFiction)),
    ])
    .unwrap();
    let q = Query {
        qid: "q".into(),
        text: "ghost".into(),
        terms: vec!["ghost".into()],
    };
    let exp = expand_or_fallback(
        &q,
        Policy::FictionRlm.transfer().unwrap(),
        &FeedbackParams::default(),
        &indexes,
        &Bm25Params::default(),
    )
    .unwrap();
    assert_eq!(exp.fallback, Some(Fallback::NoSurvivors));
    assert_eq!(exp.query.weights, BTreeMap::from([("ghost".to_string(), 1.0)]));
    assert!(exp.terms.iter().all(|t| t.status == TermStatus::Filtered));
}

#[test]
fn transferred_terms_always_lie_in_target_vocabulary() {
    let bench = common::benchmark();
    let target: &Index = bench.indexes.get(CollectionLabel::NonFiction).unwrap();
    for policy in [Policy::FictionRlm, Policy::FictionNonFictionRlm, Policy::NonFictionRlm] {
        for m in [1, 3, 10] {
            for t in [1, 5, 20, 120] {
                let params = FeedbackParams {
                    fb_docs: m,
                    fb_terms: t,
                    ..Default::default()
                };
                for topic in &bench.topics {
                    let q = bench.indexes.analyze(&topic.qid, &topic.query).unwrap();
                    if !q.is_answerable() {
                        continue;
                    }
                    let exp = expand_or_fallback(&q, policy.transfer().unwrap(), &params, &bench.indexes, &Bm25Params::default())
                        .unwrap();
                    if exp.fallback.is_none() {
                        assert!(exp.query.weights.keys().all(|w| target.vocabulary_contains(w)));
                        assert!((exp.query.weights.values().sum::<f64>() - 1.0).abs() <= 1e-9);
                        assert!(exp.query.weights.len() <= t);
                    }
                    for term in exp.terms.iter().filter(|x| x.status == TermStatus::Kept) {
                        assert!(target.vocabulary_contains(&term.term));
                    }
                }
            }
        }
    }
}

#[test]
fn query_only_mixture_reproduces_baseline_ranking() {
    let bench = common::benchmark();
    let base = run_config(&bench, &ExperimentConfig::new(Policy::NonFictionBase, None)).unwrap();
    let params = FeedbackParams {
        alpha: 1.0,
        ..Default::default()
    };
    let rlm = run_config(&bench, &ExperimentConfig::new(Policy::NonFictionRlm, Some(params))).unwrap();
    for (qid, hits) in &base.run.runs {
        let a: Vec<&str> = hits.iter().map(|h| h.passage_id.as_str()).collect();
        let b: Vec<&str> = rlm.run.hits(qid).iter().map(|h| h.passage_id.as_str()).collect();
        assert_eq!(a, b, "{qid}");
    }
    assert_eq!(base.evaluation.aggregate, rlm.evaluation.aggregate);
}
