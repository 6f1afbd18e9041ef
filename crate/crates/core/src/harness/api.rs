use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Instant;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use super::benchmark::retrieve;
use crate::corpus::Genre;
use crate::error::{Error, Result};
use crate::evalkit::{Grid, QrelSet};
use crate::feedback::{ExpansionTerm, Fallback, FeedbackParams, IndexSet, Policy};
use crate::judging::TopicSpec;
use crate::retrieval::Bm25Params;

const MAX_DEPTH: usize = 10_000;
const SNIPPET_CHARS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionInfo {
    pub label: String,
    pub num_passages: usize,
    pub vocabulary_size: usize,
    pub avgdl: f64,
    pub fingerprint: String,
}

/// Immutable data shared by all requests.
#[derive(Debug, Clone)]
pub struct ApiState {
    pub indexes: IndexSet,
    pub topics: Vec<TopicSpec>,
    pub qrels: Option<QrelSet>,
    pub bm25: Bm25Params,
    /// Used for parameters a request leaves out.
    pub defaults: FeedbackParams,
    /// Requests outside this grid are served but flagged `off_grid`.
    pub grid: Grid,
    /// Passage id → raw text, for snippets. May be empty.
    pub passage_texts: BTreeMap<String, String>,
    collections: Vec<CollectionInfo>,
}

impl ApiState {
    pub fn new(indexes: IndexSet, topics: Vec<TopicSpec>, qrels: Option<QrelSet>) -> Self {
        let collections = indexes
            .iter()
            .map(|i| CollectionInfo {
                label: i.label().to_string(),
                num_passages: i.num_passages(),
                vocabulary_size: i.meta().vocabulary_size,
                avgdl: i.avgdl(),
                fingerprint: i.fingerprint(),
            })
            .collect();
        Self {
            indexes,
            topics,
            qrels,
            bm25: Bm25Params::default(),
            defaults: FeedbackParams::default(),
            grid: Grid::default(),
            passage_texts: BTreeMap::new(),
            collections,
        }
    }

    pub fn with_passage_texts(mut self, texts: BTreeMap<String, String>) -> Self {
        self.passage_texts = texts;
        self
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchRequest {
    pub query: String,
    pub policy: String,
    #[serde(default)]
    pub qid: Option<String>,
    #[serde(default, rename = "M", alias = "m")]
    pub m: Option<usize>,
    #[serde(default, rename = "T", alias = "t")]
    pub t: Option<usize>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiHit {
    pub rank: usize,
    pub passage_id: String,
    pub doc_id: String,
    pub genre: Genre,
    pub score: f64,
    pub snippet: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub qid: String,
    pub policy: Policy,
    pub params: Option<FeedbackParams>,
    pub depth: usize,
    /// M or T is not a point of the configured grid.
    pub off_grid: bool,
    pub hits: Vec<ApiHit>,
    pub expansion: Vec<ExpansionTerm>,
    pub fallback: Option<Fallback>,
    pub unanswerable: bool,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub error: String,
    pub message: String,
    #[serde(skip)]
    status: u16,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        Self {
            error: error.to_owned(),
            message: message.into(),
            status: status.as_u16(),
        }
    }

    fn bad_request(error: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, error, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParam(m) => Self::bad_request("invalid_parameter", m),
            Error::MissingCollection(l) => {
                Self::bad_request("collection_unavailable", format!("collection {l} is not loaded"))
            }
            other => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", other.to_string()),
        }
    }
}

pub fn router(state: Arc<ApiState>) -> Router {
    Router::new()
        .route("/collections", get(collections))
        .route("/search", post(search_handler))
        .route("/qrels/{qid}", get(qrels))
        .route("/topics", get(topics))
        .with_state(state)
}

/// Serve until the process is stopped.
pub async fn serve_api(addr: SocketAddr, state: Arc<ApiState>) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| Error::io(addr.to_string(), e))?;
    tracing::info!(%addr, "serving");
    axum::serve(listener, router(state))
        .await
        .map_err(|e| Error::io(addr.to_string(), e))
}

async fn collections(State(s): State<Arc<ApiState>>) -> Json<Vec<CollectionInfo>> {
    Json(s.collections.clone())
}

async fn topics(State(s): State<Arc<ApiState>>) -> Json<Vec<TopicSpec>> {
    Json(s.topics.clone())
}

#[derive(Debug, Serialize)]
struct QrelsResponse<'a> {
    qid: &'a str,
    judgments: &'a BTreeMap<String, u8>,
}

async fn qrels(State(s): State<Arc<ApiState>>, Path(qid): Path<String>) -> Response {
    match s.qrels.as_ref().and_then(|q| q.for_query(&qid)) {
        Some(j) => Json(QrelsResponse { qid: &qid, judgments: j }).into_response(),
        None => ApiError::new(StatusCode::NOT_FOUND, "unknown_qid", format!("no judgments for {qid:?}")).into_response(),
    }
}

async fn search_handler(
    State(s): State<Arc<ApiState>>,
    body: std::result::Result<Json<SearchRequest>, JsonRejection>,
) -> std::result::Result<Json<SearchResponse>, ApiError> {
    let Json(req) = body.map_err(|e| ApiError::bad_request("malformed_request", e.body_text()))?;
    tokio::task::spawn_blocking(move || run_search(&s, req))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map(Json)
}

/// The body of POST /search, callable without a server.
pub fn run_search(s: &ApiState, req: SearchRequest) -> std::result::Result<SearchResponse, ApiError> {
    let started = Instant::now();
    let policy: Policy = req.policy.parse().map_err(|m: String| ApiError::bad_request("unknown_policy", m))?;
    let depth = req.depth.unwrap_or(100);
    if depth == 0 || depth > MAX_DEPTH {
        return Err(ApiError::bad_request(
            "invalid_parameter",
            format!("depth must be in 1..={MAX_DEPTH}"),
        ));
    }
    let params = policy.transfer().map(|_| FeedbackParams {
        fb_docs: req.m.unwrap_or(s.defaults.fb_docs),
        fb_terms: req.t.unwrap_or(s.defaults.fb_terms),
        alpha: req.alpha.unwrap_or(s.defaults.alpha),
        mu: req.mu.unwrap_or(s.defaults.mu),
    });
    let off_grid = params.is_some_and(|p| !s.grid.m_values.contains(&p.fb_docs) || !s.grid.t_values.contains(&p.fb_terms));
    let qid = req.qid.unwrap_or_else(|| "api".to_owned());
    let (result, expansion) = retrieve(policy, params.as_ref(), &qid, &req.query, &s.indexes, &s.bm25, depth)?;
    let target = s.indexes.get(policy.retrieval_target())?;
    let hits = result
        .hits
        .into_iter()
        .map(|h| {
            let r = target.passage_ref(&h.passage_id).expect("hit comes from the index");
            ApiHit {
                rank: h.rank,
                doc_id: target.doc_id(r).to_owned(),
                genre: target.genre(r),
                score: h.score,
                snippet: s.passage_texts.get(&h.passage_id).map(|t| snippet(t)),
                passage_id: h.passage_id,
            }
        })
        .collect();
    let (expansion, fallback) = match expansion {
        Some(e) => (e.terms, e.fallback),
        None => (Vec::new(), None),
    };
    Ok(SearchResponse {
        qid,
        policy,
        params,
        depth,
        off_grid,
        hits,
        expansion,
        fallback,
        unanswerable: result.unanswerable,
        timing_ms: started.elapsed().as_secs_f64() * 1000.0,
    })
}

fn snippet(text: &str) -> String {
    let flat: String = text.split_whitespace().collect::<Vec<_>>().join(" ");
    match flat.char_indices().nth(SNIPPET_CHARS) {
        Some((i, _)) => format!("{}…", &flat[..i]),
        None => flat,
    }
}
