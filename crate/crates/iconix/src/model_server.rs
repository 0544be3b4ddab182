//! Serves a [`BackendSet`] over the model-service protocol.
//!
//! Used by `iconix-serve --models` to expose the mock backends to other
//! processes, and by tests as the far side of [`crate::remote`].

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use iconix_core::backend::{BackendError, BackendKind, BackendSet};
use iconix_core::BinaryMask;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::codec::{png_base64, raster_from_base64, MaskRle};
use crate::wire::*;

fn parse<T: DeserializeOwned>(body: &[u8]) -> Result<T, BackendError> {
    let value: serde_json::Value =
        serde_json::from_slice(body).map_err(|e| BackendError::Malformed(format!("request body: {e}")))?;
    match value.get("v").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(WIRE_VERSION) => {}
        other => return Err(BackendError::Malformed(format!("unsupported protocol version {other:?}"))),
    }
    serde_json::from_value(value).map_err(|e| BackendError::Malformed(format!("request body: {e}")))
}

fn image(field: &str) -> Result<iconix_core::Raster, BackendError> {
    raster_from_base64(field).map_err(|e| BackendError::Malformed(format!("image: {e}")))
}

fn payload<T: Serialize>(p: T) -> Result<serde_json::Value, BackendError> {
    serde_json::to_value(p).map_err(|e| BackendError::Malformed(e.to_string()))
}

fn dispatch(kind: BackendKind, body: &[u8], set: &BackendSet) -> Result<serde_json::Value, BackendError> {
    match kind {
        BackendKind::Generate => {
            let req: GenerateRequest = parse(body)?;
            let condition = req.condition.as_deref().map(image).transpose()?;
            let img = set.generator.generate(&req.prompt, condition.as_ref())?;
            payload(ImagePayload { image: png_base64(&img) })
        }
        BackendKind::Simplify => {
            let req: SimplifyRequest = parse(body)?;
            let frames = set.simplifier.simplify(&image(&req.image)?, req.start_step, req.step_count)?;
            payload(FramesPayload {
                frames: frames.iter().map(png_base64).collect(),
            })
        }
        BackendKind::Segment => {
            let req: ImageRequest = parse(body)?;
            let masks = set.segmenter.segment(&image(&req.image)?)?;
            payload(MasksPayload {
                masks: masks.iter().map(|m: &BinaryMask| MaskRle::from(m)).collect(),
            })
        }
        BackendKind::Score => {
            let req: ScoreRequest = parse(body)?;
            let s = set.scorer.score_attributes(&req.candidate, &req.base)?;
            payload(ScorePayload {
                scores: RawScores {
                    c: s.scores.concreteness().into(),
                    f: s.scores.familiarity().into(),
                    i: s.scores.imageability().into(),
                    m: s.scores.meaningfulness().into(),
                },
                interpretation: s.interpretation,
                category: s.category,
            })
        }
        BackendKind::Expand => {
            let req: ExpandRequest = parse(body)?;
            let known = req.known.into_iter().collect();
            let e = set.expander.expand_concepts(&req.input, &known)?;
            payload(ExpandPayload {
                concepts: e.concepts,
                warnings: e.warnings,
            })
        }
        BackendKind::Features => {
            let req: ImageRequest = parse(body)?;
            let v = set.features.extract_features(&image(&req.image)?)?;
            payload(FeaturesPayload { values: v.into() })
        }
        BackendKind::Perceptual => {
            let req: PerceptualRequest = parse(body)?;
            let distance = set.metric.distance(&image(&req.a)?, &image(&req.b)?)?;
            payload(DistancePayload { distance })
        }
        BackendKind::Restyle => {
            let req: RestyleRequest = parse(body)?;
            let img = set.restyler.restyle(&image(&req.image)?, req.variant)?;
            payload(ImagePayload { image: png_base64(&img) })
        }
    }
}

/// Answers one request body for `kind`, returning the HTTP status and the
/// JSON envelope.
pub fn handle(kind: BackendKind, body: &[u8], set: &BackendSet) -> (StatusCode, String) {
    let (status, envelope) = match dispatch(kind, body, set) {
        Ok(p) => (StatusCode::OK, Envelope::ok(p)),
        Err(e) => {
            let status = match e {
                BackendError::Malformed(_) => StatusCode::BAD_REQUEST,
                BackendError::Timeout(_) => StatusCode::GATEWAY_TIMEOUT,
                BackendError::Unavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            };
            (status, Envelope::<serde_json::Value>::err(&e))
        }
    };
    (status, serde_json::to_string(&envelope).expect("envelopes serialize"))
}

async fn serve_kind(State(set): State<Arc<BackendSet>>, Path(kind): Path<String>, body: Bytes) -> Response {
    let Some(kind) = BackendKind::ALL.into_iter().find(|k| k.as_str() == kind) else {
        return (StatusCode::NOT_FOUND, format!("unknown backend kind `{kind}`")).into_response();
    };
    let result = tokio::task::spawn_blocking(move || handle(kind, &body, &set)).await;
    match result {
        Ok((status, json)) => (status, [("content-type", "application/json")], json).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

pub fn router(set: Arc<BackendSet>) -> Router {
    Router::new()
        .route("/v1/{kind}", post(serve_kind))
        .layer(DefaultBodyLimit::max(64 * 1024 * 1024))
        .with_state(set)
}
