use std::collections::BTreeMap;
use std::io::Write;
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::assessor::{AssessmentRequest, AssessorClient};
use super::pool::{Pool, TopicSpec};
use crate::error::{Error, Result};
use crate::evalkit::{QrelSet, MAX_GRADE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssessorKind {
    Machine,
    Expert,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub qid: String,
    pub passage_id: String,
    pub grade: u8,
    pub assessor: AssessorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

impl Judgment {
    pub fn key(&self) -> (&str, &str) {
        (&self.qid, &self.passage_id)
    }
}

/// Two responses arrived but neither carried a readable grade.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingGrade {
    pub qid: String,
    pub passage_id: String,
    pub responses: Vec<String>,
}

/// The assessor could not be reached; grade later.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueuedJudgment {
    pub qid: String,
    pub passage_id: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradingOutcome {
    pub judgments: Vec<Judgment>,
    pub missing: Vec<MissingGrade>,
    pub queued: Vec<QueuedJudgment>,
}

impl GradingOutcome {
    pub fn extend(&mut self, other: GradingOutcome) {
        self.judgments.extend(other.judgments);
        self.missing.extend(other.missing);
        self.queued.extend(other.queued);
        self.sort();
    }

    fn sort(&mut self) {
        self.judgments.sort_by(|a, b| a.key().cmp(&b.key()));
        self.missing.sort_by(|a, b| (&a.qid, &a.passage_id).cmp(&(&b.qid, &b.passage_id)));
        self.queued.sort_by(|a, b| (&a.qid, &a.passage_id).cmp(&(&b.qid, &b.passage_id)));
    }

    /// Judgments as qrels; fails on duplicate pairs.
    pub fn to_qrels(&self) -> Result<QrelSet> {
        judgments_to_qrels(&self.judgments)
    }
}

pub fn judgments_to_qrels(judgments: &[Judgment]) -> Result<QrelSet> {
    let mut q = QrelSet::default();
    for j in judgments {
        q.insert(&j.qid, &j.passage_id, j.grade)?;
    }
    Ok(q)
}

/// One judgment per line, in the given order.
pub fn write_judgments_jsonl<W: Write>(mut out: W, judgments: &[Judgment]) -> std::io::Result<()> {
    for j in judgments {
        serde_json::to_writer(&mut out, j)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

static GRADE_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bgrade\s*:\s*\**\s*([0-9]+(?:\.[0-9]+)?)").expect("valid regex"));

/// Read `Grade: <0-4>` from a response; the text after it becomes the rationale.
pub fn parse_grade(response: &str) -> Option<(u8, Option<String>)> {
    let caps = GRADE_RE.captures(response)?;
    let num = caps.get(1)?;
    let grade: u8 = num.as_str().parse().ok()?;
    if grade > MAX_GRADE {
        return None;
    }
    let rest = response[num.end()..]
        .trim_start_matches(|c: char| c == '*' || c.is_whitespace() || "-–—:.,;".contains(c))
        .trim();
    Some((grade, (!rest.is_empty()).then(|| rest.to_owned())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradingOptions {
    /// Maximum concurrent assessor calls.
    pub max_in_flight: usize,
}

impl Default for GradingOptions {
    fn default() -> Self {
        Self { max_in_flight: 4 }
    }
}

enum Attempted {
    Graded(Judgment),
    Missing(MissingGrade),
    Queued(QueuedJudgment),
}

fn grade_one(
    client: &dyn AssessorClient,
    topic: &TopicSpec,
    passage_id: &str,
    text: Option<&String>,
    instructions: &str,
) -> Attempted {
    let Some(text) = text else {
        return Attempted::Queued(QueuedJudgment {
            qid: topic.qid.clone(),
            passage_id: passage_id.to_owned(),
            error: "passage text unavailable".into(),
        });
    };
    let mut responses = Vec::new();
    let mut last_error = None;
    for attempt in 0..2 {
        let request = AssessmentRequest {
            qid: topic.qid.clone(),
            query: topic.query.clone(),
            passage_id: passage_id.to_owned(),
            passage_text: text.clone(),
            instructions: instructions.to_owned(),
            attempt,
        };
        match client.submit(&request) {
            Ok(raw) => match parse_grade(&raw) {
                Some((grade, rationale)) => {
                    return Attempted::Graded(Judgment {
                        qid: topic.qid.clone(),
                        passage_id: passage_id.to_owned(),
                        grade,
                        assessor: AssessorKind::Machine,
                        rationale,
                    })
                }
                None => responses.push(raw),
            },
            Err(e) => last_error = Some(e.to_string()),
        }
    }
    if responses.is_empty() {
        Attempted::Queued(QueuedJudgment {
            qid: topic.qid.clone(),
            passage_id: passage_id.to_owned(),
            error: last_error.unwrap_or_default(),
        })
    } else {
        Attempted::Missing(MissingGrade {
            qid: topic.qid.clone(),
            passage_id: passage_id.to_owned(),
            responses,
        })
    }
}

/// Ask the machine assessor about every pooled passage.
///
/// Each passage gets up to two attempts. Output is sorted by (qid, passage_id)
/// regardless of scheduling.
pub fn grade_pool(
    pool: &Pool,
    topic: &TopicSpec,
    passage_texts: &BTreeMap<String, String>,
    client: &dyn AssessorClient,
    instructions: &str,
    options: &GradingOptions,
) -> Result<GradingOutcome> {
    if pool.qid != topic.qid {
        return Err(Error::KeyMismatch(pool.qid.clone(), topic.qid.clone()));
    }
    let ids: Vec<&str> = pool.passage_ids().collect();
    let threads = rayon::ThreadPoolBuilder::new()
        .num_threads(options.max_in_flight.max(1))
        .build()
        .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
    let attempts: Vec<Attempted> = threads.install(|| {
        ids.par_iter()
            .map(|pid| grade_one(client, topic, pid, passage_texts.get(*pid), instructions))
            .collect()
    });
    let mut out = GradingOutcome::default();
    for a in attempts {
        match a {
            Attempted::Graded(j) => out.judgments.push(j),
            Attempted::Missing(m) => out.missing.push(m),
            Attempted::Queued(q) => out.queued.push(q),
        }
    }
    out.sort();
    Ok(out)
}
