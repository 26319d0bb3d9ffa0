//! HTTP front end for a [`Session`].
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | GET | `/queue/next?n=INT` | | `[{id, text}]` |
//! | POST | `/labels` | `{id, label, annotator}` | `{ack, labeled_count, retrain_scheduled, supersedes}` |
//! | GET | `/status` | | `{labeled, remaining, kappas, stop_recommended, model_version, ...}` |
//! | POST | `/filter?threshold=REAL&limit=INT` | `[{id, text, ...}]` | `{relevant, irrelevant, uncertain_count, ...}` |
//! | GET | `/curve` | | curve lines, tab-separated |
//!
//! Errors are `{"error": message}` with a 4xx or 5xx status.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{ScoredTweet, Session};
use crate::error::Error;
use crate::ingest::{AnalyzedTweet, Tweet};

const DEFAULT_BATCH: usize = 10;

#[derive(Clone)]
pub struct AppState {
    pub session: Arc<Session>,
    /// Curve lines served at `/curve`, if a replication run produced them.
    pub curve: Option<PathBuf>,
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::UnknownId(_) => StatusCode::NOT_FOUND,
            Error::InvalidLabel(_) | Error::InvalidArgument(_) | Error::Json(_) | Error::Record { .. } => {
                StatusCode::BAD_REQUEST
            }
            Error::Untrained => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError(code, e.to_string())
    }
}

fn bad_request(msg: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, msg.into())
}

type ApiResult<T> = Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/queue/next", get(queue_next))
        .route("/labels", post(post_label))
        .route("/status", get(status))
        .route("/filter", post(filter))
        .route("/curve", get(curve))
        .fallback(|| async { ApiError(StatusCode::NOT_FOUND, "no such endpoint".into()) })
        .with_state(state)
}

fn param<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> ApiResult<Option<T>> {
    q.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| bad_request(format!("bad value for {key}: {v:?}")))
        })
        .transpose()
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, Error> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(ApiError::from)
}

async fn queue_next(State(s): State<AppState>, Query(q): Query<HashMap<String, String>>) -> ApiResult<Response> {
    let n: usize = param(&q, "n")?.unwrap_or(DEFAULT_BATCH);
    let session = s.session.clone();
    let items = blocking(move || Ok(session.next_batch(n))).await?;
    Ok(Json(items).into_response())
}

#[derive(Deserialize)]
struct LabelBody {
    id: String,
    label: i64,
    #[serde(default)]
    annotator: String,
}

/// Retrains in the background; the session runs at most one at a time.
pub fn spawn_retrain(session: Arc<Session>) {
    tokio::task::spawn_blocking(move || {
        if let Err(e) = session.run_pending_retrains() {
            log::error!("retrain failed: {e}");
        }
    });
}

async fn post_label(State(s): State<AppState>, body: Bytes) -> ApiResult<Response> {
    let body: LabelBody = serde_json::from_slice(&body).map_err(|e| bad_request(format!("bad label body: {e}")))?;
    let session = s.session.clone();
    let ack = blocking(move || session.submit_label(&body.id, body.label, &body.annotator)).await?;
    if s.session.retrain_pending() {
        spawn_retrain(s.session.clone());
    }
    Ok(Json(ack).into_response())
}

async fn status(State(s): State<AppState>) -> Json<super::Status> {
    Json(s.session.status())
}

#[derive(Deserialize)]
struct FilterRecord {
    id: String,
    text: String,
    #[serde(default)]
    ts: i64,
    #[serde(default)]
    lemmas: Option<Vec<String>>,
    #[serde(default)]
    pos: Option<Vec<String>>,
}

impl FilterRecord {
    fn into_analyzed(self) -> Result<AnalyzedTweet, ApiError> {
        let tweet = Tweet {
            id: self.id,
            ts: self.ts,
            text: self.text,
            label: None,
        };
        match self.lemmas {
            None => Ok(AnalyzedTweet::passthrough(tweet)),
            Some(lemmas) => {
                if self.pos.as_ref().is_some_and(|p| p.len() != lemmas.len()) {
                    return Err(bad_request(format!("tweet {}: lemma and POS lengths differ", tweet.id)));
                }
                Ok(AnalyzedTweet {
                    tweet,
                    lemmas,
                    pos: self.pos,
                })
            }
        }
    }
}

#[derive(Serialize)]
struct FilterReply {
    relevant: Vec<ScoredTweet>,
    irrelevant: Vec<ScoredTweet>,
    uncertain_count: usize,
    uncertain: Vec<String>,
}

async fn filter(
    State(s): State<AppState>,
    Query(q): Query<HashMap<String, String>>,
    body: Bytes,
) -> ApiResult<Response> {
    let threshold: f64 = param(&q, "threshold")?.unwrap_or(0.0);
    let limit: Option<usize> = param(&q, "limit")?;
    let records: Vec<FilterRecord> =
        serde_json::from_slice(&body).map_err(|e| bad_request(format!("bad filter body: {e}")))?;
    let tweets = records
        .into_iter()
        .map(FilterRecord::into_analyzed)
        .collect::<ApiResult<Vec<_>>>()?;
    let session = s.session.clone();
    let r = blocking(move || session.filter(&tweets, threshold, limit)).await?;
    Ok(Json(FilterReply {
        uncertain_count: r.uncertain.len(),
        uncertain: r.uncertain.into_iter().map(|t| t.id).collect(),
        relevant: r.relevant,
        irrelevant: r.irrelevant,
    })
    .into_response())
}

async fn curve(State(s): State<AppState>) -> ApiResult<Response> {
    let Some(path) = s.curve.clone() else {
        return Err(ApiError(
            StatusCode::NOT_FOUND,
            "no curve data; run `curve` first".into(),
        ));
    };
    let text = tokio::task::spawn_blocking(move || {
        std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(|e| ApiError(StatusCode::NOT_FOUND, e))?;
    Ok((
        [(header::CONTENT_TYPE, "text/tab-separated-values; charset=utf-8")],
        text,
    )
        .into_response())
}

/// Serves until ctrl-c. Finishes any pending retrain left by a previous run
/// first.
pub async fn serve(state: AppState, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    if state.session.retrain_pending() {
        spawn_retrain(state.session.clone());
    }
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
