//! JSON bodies of the model-service protocol (`POST {url}/v1/{kind}`).
//!
//! Every request carries `"v": 1`. Responses are wrapped in
//! [`Envelope`]: `{"ok": true, "payload": …}` or
//! `{"ok": false, "error": {"kind", "message"}}`. Images travel as base64
//! PNG strings and masks as [`MaskRle`].

use iconix_core::backend::{BackendError, StyleVariant};
use iconix_core::ideation::{Category, Concept};
use serde::{Deserialize, Serialize};

use crate::codec::MaskRle;

pub const WIRE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<WireError>,
}

impl<T> Envelope<T> {
    pub fn ok(payload: T) -> Self {
        Self {
            ok: true,
            payload: Some(payload),
            error: None,
        }
    }

    pub fn err(e: &BackendError) -> Self {
        Self {
            ok: false,
            payload: None,
            error: Some(WireError::from(e)),
        }
    }

    pub fn into_result(self) -> Result<T, BackendError> {
        match (self.ok, self.payload, self.error) {
            (true, Some(p), _) => Ok(p),
            (false, _, Some(e)) => Err(e.into()),
            _ => Err(BackendError::Malformed("envelope has neither payload nor error".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WireErrorKind {
    Unavailable,
    Timeout,
    Malformed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireError {
    pub kind: WireErrorKind,
    pub message: String,
}

impl From<&BackendError> for WireError {
    fn from(e: &BackendError) -> Self {
        let (kind, message) = match e {
            BackendError::Unavailable(m) => (WireErrorKind::Unavailable, m),
            BackendError::Timeout(m) => (WireErrorKind::Timeout, m),
            BackendError::Malformed(m) => (WireErrorKind::Malformed, m),
        };
        Self {
            kind,
            message: message.clone(),
        }
    }
}

impl From<WireError> for BackendError {
    fn from(e: WireError) -> Self {
        match e.kind {
            WireErrorKind::Unavailable => BackendError::Unavailable(e.message),
            WireErrorKind::Timeout => BackendError::Timeout(e.message),
            WireErrorKind::Malformed => BackendError::Malformed(e.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub v: u32,
    pub prompt: String,
    #[serde(default)]
    pub condition: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImagePayload {
    pub image: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplifyRequest {
    pub v: u32,
    pub image: String,
    pub start_step: u32,
    pub step_count: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FramesPayload {
    pub frames: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageRequest {
    pub v: u32,
    pub image: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MasksPayload {
    pub masks: Vec<MaskRle>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub v: u32,
    pub candidate: Concept,
    pub base: Concept,
}

/// Raw scores; out-of-range values are clamped by the client.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawScores {
    pub c: i64,
    pub f: i64,
    pub i: i64,
    pub m: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScorePayload {
    pub scores: RawScores,
    pub interpretation: String,
    pub category: Category,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpandRequest {
    pub v: u32,
    pub input: Concept,
    pub known: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpandPayload {
    pub concepts: Vec<Concept>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeaturesPayload {
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerceptualRequest {
    pub v: u32,
    pub a: String,
    pub b: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistancePayload {
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestyleRequest {
    pub v: u32,
    pub image: String,
    pub variant: StyleVariant,
}
