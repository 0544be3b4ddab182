//! Session HTTP API.
//!
//! ```text
//! POST /v1/sessions                      config overrides → session
//! GET  /v1/sessions/{id}                 → session
//! POST /v1/sessions/{id}/ideate          {concept}
//! POST /v1/sessions/{id}/scaffold        {candidate_label?}
//! POST /v1/sessions/{id}/exemplars       {prompt_edits?, selections?}
//! POST /v1/sessions/{id}/simplify        {exemplar_views?}
//! POST /v1/sessions/{id}/grid            {picks?, columns?}
//! POST /v1/sessions/{id}/restyle         {variants}
//! GET  /v1/sessions/{id}/artifacts/{hash}
//! GET  /v1/sessions/{id}/scatter/{view}
//! ```
//!
//! Errors are `{"error": {"code", "stage", "message"}}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use iconix_core::backend::{BackendError, StyleVariant};
use iconix_core::scaffold::{Selections, View};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::session::{SessionError, SessionManager, Stage, StageRequest};
use crate::stages::{ErrorClass, StageError};
use crate::store::StoreError;

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: ErrorDetail,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorDetail {
    pub code: String,
    pub stage: Option<Stage>,
    pub message: String,
}

pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    stage: Option<Stage>,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            stage: None,
            message: message.into(),
        }
    }
}

fn backend_code(e: &BackendError) -> &'static str {
    match e {
        BackendError::Unavailable(_) => "backend_unavailable",
        BackendError::Timeout(_) => "backend_timeout",
        BackendError::Malformed(_) => "malformed_response",
    }
}

fn stage_backend_error(e: &StageError) -> Option<&BackendError> {
    use iconix_core::ideation::IdeationError;
    match e {
        StageError::Backend { source, .. } => Some(source),
        StageError::Ideation(IdeationError::Backend { source, .. }) => Some(source),
        StageError::Pipeline(p) => p.backend(),
        _ => None,
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        let (status, code, stage) = match &e {
            SessionError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found", None),
            SessionError::InvalidConfig(_) => (StatusCode::BAD_REQUEST, "invalid_config", None),
            SessionError::StageOrder { current, .. } => (StatusCode::CONFLICT, "stage_order_violation", Some(*current)),
            SessionError::Stage { stage, source } => {
                let (status, code) = match source.class() {
                    ErrorClass::Config => (StatusCode::BAD_REQUEST, "invalid_request"),
                    ErrorClass::Backend => (
                        StatusCode::BAD_GATEWAY,
                        stage_backend_error(source).map(backend_code).unwrap_or("backend_unavailable"),
                    ),
                    ErrorClass::EmptyPool => (StatusCode::UNPROCESSABLE_ENTITY, "empty_pool"),
                    ErrorClass::Module => (StatusCode::UNPROCESSABLE_ENTITY, "module_error"),
                    ErrorClass::Io => (StatusCode::INTERNAL_SERVER_ERROR, "storage_error"),
                };
                (status, code, Some(*stage))
            }
            SessionError::Corrupt(_) => (StatusCode::INTERNAL_SERVER_ERROR, "corrupt_store", None),
            SessionError::Io(_) => (StatusCode::INTERNAL_SERVER_ERROR, "storage_error", None),
            SessionError::Internal(_) => (StatusCode::INTERNAL_SERVER_ERROR, "internal", None),
        };
        Self {
            status,
            code,
            stage,
            message,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: ErrorDetail {
                code: self.code.to_string(),
                stage: self.stage,
                message: self.message,
            },
        };
        (self.status, Json(body)).into_response()
    }
}

type Shared = Arc<SessionManager>;

/// Parses an optional JSON body; an empty body reads as `{}`.
fn body<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    let text = if bytes.iter().all(u8::is_ascii_whitespace) { &b"{}"[..] } else { bytes };
    serde_json::from_slice(text).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_request", e.to_string()))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, SessionError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(ApiError::from)
}

async fn create(State(m): State<Shared>, bytes: Bytes) -> Result<Response, ApiError> {
    let overrides: serde_json::Value = body(&bytes)?;
    let state = blocking(move || m.create(&overrides)).await?;
    Ok((StatusCode::CREATED, Json(state)).into_response())
}

async fn show(State(m): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let state = blocking(move || m.load(&id)).await?;
    Ok(Json(state).into_response())
}

async fn run(m: Shared, id: String, request: StageRequest) -> Result<Response, ApiError> {
    let state = m.advance(&id, request).await?;
    Ok(Json(state).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IdeateBody {
    concept: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaffoldBody {
    #[serde(default)]
    candidate_label: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExemplarsBody {
    #[serde(default)]
    prompt_edits: BTreeMap<View, String>,
    #[serde(default)]
    selections: Option<Selections>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimplifyBody {
    #[serde(default)]
    exemplar_views: Option<Vec<View>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridBody {
    #[serde(default)]
    picks: Option<BTreeMap<View, Vec<u32>>>,
    #[serde(default)]
    columns: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RestyleBody {
    variants: Vec<StyleVariant>,
}

async fn ideate(State(m): State<Shared>, Path(id): Path<String>, bytes: Bytes) -> Result<Response, ApiError> {
    let b: IdeateBody = body(&bytes)?;
    run(m, id, StageRequest::Ideate { concept: b.concept }).await
}

async fn scaffold(State(m): State<Shared>, Path(id): Path<String>, bytes: Bytes) -> Result<Response, ApiError> {
    let b: ScaffoldBody = body(&bytes)?;
    run(
        m,
        id,
        StageRequest::Scaffold {
            candidate_label: b.candidate_label,
        },
    )
    .await
}

async fn exemplars(State(m): State<Shared>, Path(id): Path<String>, bytes: Bytes) -> Result<Response, ApiError> {
    let b: ExemplarsBody = body(&bytes)?;
    run(
        m,
        id,
        StageRequest::Exemplars {
            prompt_edits: b.prompt_edits,
            selections: b.selections,
        },
    )
    .await
}

async fn simplify(State(m): State<Shared>, Path(id): Path<String>, bytes: Bytes) -> Result<Response, ApiError> {
    let b: SimplifyBody = body(&bytes)?;
    run(
        m,
        id,
        StageRequest::Simplify {
            exemplar_views: b.exemplar_views,
        },
    )
    .await
}

async fn grid(State(m): State<Shared>, Path(id): Path<String>, bytes: Bytes) -> Result<Response, ApiError> {
    let b: GridBody = body(&bytes)?;
    run(
        m,
        id,
        StageRequest::Grid {
            picks: b.picks,
            columns: b.columns,
        },
    )
    .await
}

async fn restyle(State(m): State<Shared>, Path(id): Path<String>, bytes: Bytes) -> Result<Response, ApiError> {
    let b: RestyleBody = body(&bytes)?;
    run(m, id, StageRequest::Restyle { variants: b.variants }).await
}

fn content_type(name: &str) -> &'static str {
    match name.rsplit('.').next() {
        Some("png") => "image/png",
        Some("json") => "application/json",
        _ => "application/octet-stream",
    }
}

async fn artifact(State(m): State<Shared>, Path((id, name)): Path<(String, String)>) -> Result<Response, ApiError> {
    let (name, bytes) = blocking(move || {
        m.load(&id)?;
        let store = m.store(&id);
        let candidates = if name.contains('.') {
            vec![name]
        } else {
            ["png", "json"].iter().map(|ext| format!("{name}.{ext}")).collect()
        };
        for candidate in candidates {
            match store.get(&candidate) {
                Ok(bytes) => return Ok((candidate, bytes)),
                Err(StoreError::NotFound(_)) | Err(StoreError::BadRef(_)) => continue,
                Err(e) => return Err(e.into()),
            }
        }
        Err(SessionError::NotFound(format!("artifact in session `{id}`")))
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, content_type(&name))], bytes).into_response())
}

async fn scatter(State(m): State<Shared>, Path((id, view)): Path<(String, String)>) -> Result<Response, ApiError> {
    let view = View::parse(&view)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("unknown view `{view}`")))?;
    let state = blocking(move || m.load(&id)).await?;
    let snap = state
        .simplification
        .as_ref()
        .and_then(|s| s.get(&view))
        .ok_or_else(|| ApiError {
            status: StatusCode::NOT_FOUND,
            code: "not_found",
            stage: Some(state.stage),
            message: format!("no simplification for the {} view", view.as_str()),
        })?;
    Ok(Json(&snap.scatter).into_response())
}

pub fn router(manager: Shared) -> Router {
    Router::new()
        .route("/v1/sessions", post(create))
        .route("/v1/sessions/{id}", get(show))
        .route("/v1/sessions/{id}/ideate", post(ideate))
        .route("/v1/sessions/{id}/scaffold", post(scaffold))
        .route("/v1/sessions/{id}/exemplars", post(exemplars))
        .route("/v1/sessions/{id}/simplify", post(simplify))
        .route("/v1/sessions/{id}/grid", post(grid))
        .route("/v1/sessions/{id}/restyle", post(restyle))
        .route("/v1/sessions/{id}/artifacts/{hash}", get(artifact))
        .route("/v1/sessions/{id}/scatter/{view}", get(scatter))
        .with_state(manager)
}
