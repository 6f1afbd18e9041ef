//! Machine assessor clients and the content-addressed transcript cache.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Environment variable holding the assessor endpoint credential.
pub const API_KEY_ENV: &str = "CHRONOSEARCH_ASSESSOR_KEY";

/// Default grading instructions. The response schema line is what [`super::parse_grade`] reads.
pub const DEFAULT_INSTRUCTIONS: &str = "\
You are assessing passages from eighteenth- and nineteenth-century books for a
research collection on historical ideas and practices. Judge how useful the
passage is to a historian studying the topic. Count interpretive and cultural
relevance: a passage that shows how people of the period understood, valued or
described the topic is relevant even if it never defines it.

Grades:
0 - not relevant: the topic is absent, or a query word appears in an unrelated sense.
1 - marginal: the topic is mentioned in passing.
2 - partial: the passage says something about the topic but it is not the focus.
3 - relevant: the topic is a main subject of the passage.
4 - highly relevant: a central, substantial treatment of the topic.

Reply with one line of the form `Grade: <0-4>`, optionally followed by a short reason.";

/// Everything that determines an assessor's answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentRequest {
    pub qid: String,
    pub query: String,
    pub passage_id: String,
    pub passage_text: String,
    pub instructions: String,
    /// 0 for the first try; retries get distinct cache entries.
    pub attempt: u32,
}

impl AssessmentRequest {
    /// The user-turn text sent to the model.
    pub fn prompt(&self) -> String {
        format!("Topic: {}\n\nPassage ({}):\n{}", self.query, self.passage_id, self.passage_text)
    }
}

pub trait AssessorClient: Send + Sync {
    /// Raw response text for one passage.
    fn submit(&self, request: &AssessmentRequest) -> Result<String>;
}

impl<T: AssessorClient + ?Sized> AssessorClient for &T {
    fn submit(&self, request: &AssessmentRequest) -> Result<String> {
        (**self).submit(request)
    }
}

/// One cached exchange, stored as `<sha256>.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub key: String,
    pub namespace: String,
    pub request: AssessmentRequest,
    pub response: String,
}

/// SHA-256 of the namespace and the canonical JSON of the request.
pub fn transcript_key(namespace: &str, request: &AssessmentRequest) -> String {
    let mut h = Sha256::new();
    h.update(namespace.as_bytes());
    h.update([0u8]);
    h.update(serde_json::to_vec(request).expect("request serializes"));
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheMode {
    /// Serve hits from disk, call the inner client on misses and record them.
    Record,
    /// Serve hits from disk; misses are errors. The inner client is never called.
    Replay,
}

/// Wraps a client so every exchange is cached by content hash.
pub struct CachingAssessor<C> {
    inner: Option<C>,
    dir: PathBuf,
    namespace: String,
    mode: CacheMode,
    remote_calls: AtomicUsize,
}

impl<C: AssessorClient> CachingAssessor<C> {
    /// `namespace` separates caches for different models or endpoints.
    pub fn record(inner: C, dir: impl Into<PathBuf>, namespace: impl Into<String>) -> Result<Self> {
        Self::open(Some(inner), dir.into(), namespace.into(), CacheMode::Record)
    }

    fn open(inner: Option<C>, dir: PathBuf, namespace: String, mode: CacheMode) -> Result<Self> {
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Self {
            inner,
            dir,
            namespace,
            mode,
            remote_calls: AtomicUsize::new(0),
        })
    }

    pub fn mode(&self) -> CacheMode {
        self.mode
    }

    /// Calls forwarded to the inner client so far.
    pub fn remote_calls(&self) -> usize {
        self.remote_calls.load(Ordering::SeqCst)
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }
}

impl CachingAssessor<NoRemote> {
    pub fn replay(dir: impl Into<PathBuf>, namespace: impl Into<String>) -> Result<Self> {
        Self::open(None, dir.into(), namespace.into(), CacheMode::Replay)
    }
}

impl<C: AssessorClient> AssessorClient for CachingAssessor<C> {
    fn submit(&self, request: &AssessmentRequest) -> Result<String> {
        let key = transcript_key(&self.namespace, request);
        let path = self.path_for(&key);
        if let Some(t) = read_transcript(&path)? {
            return Ok(t.response);
        }
        let inner = match (self.mode, &self.inner) {
            (CacheMode::Record, Some(inner)) => inner,
            _ => {
                return Err(Error::Assessor(format!(
                    "no cached transcript for ({}, {}) attempt {}",
                    request.qid, request.passage_id, request.attempt
                )))
            }
        };
        self.remote_calls.fetch_add(1, Ordering::SeqCst);
        let response = inner.submit(request)?;
        let transcript = Transcript {
            key,
            namespace: self.namespace.clone(),
            request: request.clone(),
            response: response.clone(),
        };
        write_atomically(&path, &serde_json::to_vec_pretty(&transcript)?)?;
        Ok(response)
    }
}

fn read_transcript(path: &Path) -> Result<Option<Transcript>> {
    match fs::read(path) {
        Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::io(path, e)),
    }
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Placeholder inner client for replay-only caches.
pub struct NoRemote;

impl AssessorClient for NoRemote {
    fn submit(&self, _: &AssessmentRequest) -> Result<String> {
        Err(Error::Assessor("remote calls are disabled".into()))
    }
}

/// Client for an OpenAI-compatible chat-completions endpoint.
///
/// The API key is read from [`API_KEY_ENV`] and is never written to transcripts.
pub struct HttpAssessor {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    api_key: Option<String>,
}

impl HttpAssessor {
    pub fn from_env(endpoint: impl Into<String>, model: impl Into<String>) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| Error::Assessor(e.to_string()))?;
        Ok(Self {
            client,
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
        })
    }

    pub fn model(&self) -> &str {
        &self.model
    }
}

impl AssessorClient for HttpAssessor {
    fn submit(&self, request: &AssessmentRequest) -> Result<String> {
        let body = serde_json::json!({
            "model": self.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": request.instructions},
                {"role": "user", "content": request.prompt()},
            ],
        });
        let url = format!("{}/chat/completions", self.endpoint.trim_end_matches('/'));
        let mut req = self.client.post(url).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| Error::Assessor(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(Error::Assessor(format!("endpoint returned {status}")));
        }
        let value: serde_json::Value = resp.json().map_err(|e| Error::Assessor(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| Error::Assessor("response has no choices[0].message.content".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Echo;

    impl AssessorClient for Echo {
        fn submit(&self, r: &AssessmentRequest) -> Result<String> {
            Ok(format!("Grade: {}", r.passage_text.len() % 5))
        }
    }

    fn req(attempt: u32) -> AssessmentRequest {
        AssessmentRequest {
            qid: "q".into(),
            query: "whale".into(),
            passage_id: "p".into(),
            passage_text: "abc".into(),
            instructions: DEFAULT_INSTRUCTIONS.into(),
            attempt,
        }
    }

    #[test]
    fn key_depends_on_attempt_and_namespace() {
        assert_ne!(transcript_key("m", &req(0)), transcript_key("m", &req(1)));
        assert_ne!(transcript_key("m", &req(0)), transcript_key("n", &req(0)));
        assert_eq!(transcript_key("m", &req(0)).len(), 64);
    }

    #[test]
    fn record_then_replay() {
        let dir = tempfile::tempdir().unwrap();
        let rec = CachingAssessor::record(Echo, dir.path(), "m").unwrap();
        assert_eq!(rec.submit(&req(0)).unwrap(), "Grade: 3");
        assert_eq!(rec.submit(&req(0)).unwrap(), "Grade: 3");
        assert_eq!(rec.remote_calls(), 1);

        let replay = CachingAssessor::replay(dir.path(), "m").unwrap();
        assert_eq!(replay.submit(&req(0)).unwrap(), "Grade: 3");
        assert!(matches!(replay.submit(&req(1)), Err(Error::Assessor(_))));
        assert_eq!(replay.remote_calls(), 0);
    }

    #[test]
    fn instructions_carry_the_rubric() {
        for g in 0..=4 {
            assert!(DEFAULT_INSTRUCTIONS.contains(&format!("{g} - ")));
        }
        assert!(DEFAULT_INSTRUCTIONS.contains("Grade: <0-4>"));
    }
}
