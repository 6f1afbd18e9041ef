use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grading::{AssessorKind, Judgment};
use crate::error::{Error, Result};
use crate::evalkit::QrelSet;

pub const DEFAULT_VERIFICATION_FRACTION: f64 = 0.40;

/// `round(fraction · n)` with ties to even.
pub fn sample_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round_ties_even() as usize).min(n)
}

/// Seeded uniform sample without replacement, returned in (qid, passage_id) order.
///
/// The result depends only on the set of judgments, the fraction and the seed.
pub fn sample_for_verification(judgments: &[Judgment], fraction: f64, seed: u64) -> Result<Vec<Judgment>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParam(format!("fraction must be in (0, 1], got {fraction}")));
    }
    let mut sorted: Vec<&Judgment> = judgments.iter().collect();
    sorted.sort_by(|a, b| a.key().cmp(&b.key()));
    let n = sorted.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, sample_size(n, fraction)).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| sorted[i].clone()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub sampled_fraction: f64,
    pub n_sampled: usize,
    /// Pairs passed through [`resolve`].
    pub n_resolved: usize,
    pub exact_match_count: usize,
    /// `exact_match_count / n_resolved`, 0 when nothing was resolved.
    pub exact_match_rate: f64,
    /// Grades one step apart.
    pub adjacent_disagreement_count: usize,
    /// Grades two or more steps apart.
    pub wider_disagreement_count: usize,
    /// Pairs where the expert changed the machine grade.
    pub resolved_by_expert_count: usize,
}

impl AgreementReport {
    pub fn new(sampled_fraction: f64, n_sampled: usize) -> Self {
        Self {
            sampled_fraction,
            n_sampled,
            n_resolved: 0,
            exact_match_count: 0,
            exact_match_rate: 0.0,
            adjacent_disagreement_count: 0,
            wider_disagreement_count: 0,
            resolved_by_expert_count: 0,
        }
    }
}

/// The expert's grade wins; the pair is tallied into `report`.
pub fn resolve(machine: &Judgment, expert: &Judgment, report: &mut AgreementReport) -> Result<Judgment> {
    if machine.key() != expert.key() {
        return Err(Error::KeyMismatch(
            format!("{}, {}", machine.qid, machine.passage_id),
            format!("{}, {}", expert.qid, expert.passage_id),
        ));
    }
    report.n_resolved += 1;
    match machine.grade.abs_diff(expert.grade) {
        0 => report.exact_match_count += 1,
        1 => report.adjacent_disagreement_count += 1,
        _ => report.wider_disagreement_count += 1,
    }
    if machine.grade != expert.grade {
        report.resolved_by_expert_count += 1;
    }
    report.exact_match_rate = report.exact_match_count as f64 / report.n_resolved as f64;
    Ok(Judgment {
        assessor: AssessorKind::Expert,
        ..expert.clone()
    })
}

/// Merge machine judgments with expert verdicts into final qrels.
///
/// Every expert grade overrides the machine grade for its pair; expert
/// grades for pairs the machine never saw are added as-is.
pub fn finalize_qrels(
    machine: &[Judgment],
    expert: &QrelSet,
    sampled_fraction: f64,
    n_sampled: usize,
) -> Result<(QrelSet, AgreementReport)> {
    let mut report = AgreementReport::new(sampled_fraction, n_sampled);
    let mut final_grades: BTreeMap<(String, String), u8> = BTreeMap::new();
    for m in machine {
        let grade = match expert.grade(&m.qid, &m.passage_id) {
            Some(g) => {
                let e = Judgment {
                    qid: m.qid.clone(),
                    passage_id: m.passage_id.clone(),
                    grade: g,
                    assessor: AssessorKind::Expert,
                    rationale: None,
                };
                resolve(m, &e, &mut report)?.grade
            }
            None => m.grade,
        };
        if final_grades.insert((m.qid.clone(), m.passage_id.clone()), grade).is_some() {
            return Err(Error::DuplicatePassage(format!("{} {}", m.qid, m.passage_id)));
        }
    }
    for (qid, grades) in &expert.judgments {
        for (pid, &g) in grades {
            final_grades.entry((qid.clone(), pid.clone())).or_insert(g);
        }
    }
    let mut qrels = QrelSet::default();
    for ((qid, pid), g) in final_grades {
        qrels.insert(&qid, &pid, g)?;
    }
    Ok((qrels, report))
}
