//! HTTP clients for the model-service protocol and for ConceptNet.

use std::collections::BTreeSet;
use std::time::Duration;

use iconix_core::backend::{
    AttributeScorer, BackendEndpoint, BackendError, BackendKind, ConceptExpander, Expansion, FeatureExtractor,
    FeatureVector, ImageGenerator, PerceptualMetric, RelationProvider, Restyler, Scored, Segmenter, Simplifier,
    StyleVariant,
};
use iconix_core::ideation::{AttributeScores, Concept};
use iconix_core::scaffold::{conceptnet_relation, KnowledgeSource, SemanticRelation};
use iconix_core::{BinaryMask, Raster};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::codec::{png_base64, raster_from_base64, CodecError};
use crate::wire::*;

const BODY_LIMIT: u64 = 512 * 1024 * 1024;

fn agent(timeout_secs: u64) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(timeout_secs.max(1))))
        .http_status_as_error(false)
        .build()
        .into()
}

fn transport_error(url: &str, e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::Timeout(_) => BackendError::Timeout(format!("{url}: {e}")),
        ureq::Error::BodyExceedsLimit(_) | ureq::Error::Protocol(_) => {
            BackendError::Malformed(format!("{url}: {e}"))
        }
        ureq::Error::Io(ref io) if io.kind() == std::io::ErrorKind::TimedOut => {
            BackendError::Timeout(format!("{url}: {e}"))
        }
        _ => BackendError::Unavailable(format!("{url}: {e}")),
    }
}

fn malformed(e: CodecError) -> BackendError {
    BackendError::Malformed(e.to_string())
}

/// Client for one remote endpoint. It implements every backend trait; use
/// it only for the role named by its endpoint's kind.
#[derive(Clone, Debug)]
pub struct RemoteClient {
    endpoint: BackendEndpoint,
    agent: ureq::Agent,
}

impl RemoteClient {
    pub fn new(endpoint: BackendEndpoint) -> Self {
        let agent = agent(endpoint.timeout_secs);
        Self { endpoint, agent }
    }

    pub fn endpoint(&self) -> &BackendEndpoint {
        &self.endpoint
    }

    fn url(&self, kind: BackendKind) -> String {
        format!("{}/v1/{}", self.endpoint.url.trim_end_matches('/'), kind.as_str())
    }

    fn call<Q: Serialize, P: DeserializeOwned>(&self, kind: BackendKind, request: &Q) -> Result<P, BackendError> {
        let url = self.url(kind);
        let body = serde_json::to_string(request).map_err(|e| BackendError::Malformed(e.to_string()))?;
        log::debug!("POST {url} ({} bytes)", body.len());
        let mut response = self
            .agent
            .post(&url)
            .header("content-type", "application/json")
            .send(body)
            .map_err(|e| transport_error(&url, e))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .with_config()
            .limit(BODY_LIMIT)
            .read_to_string()
            .map_err(|e| transport_error(&url, e))?;
        match serde_json::from_str::<Envelope<P>>(&text) {
            Ok(envelope) => envelope.into_result(),
            Err(_) if status >= 500 => Err(BackendError::Unavailable(format!("{url}: HTTP {status}"))),
            Err(e) => Err(BackendError::Malformed(format!("{url}: HTTP {status}: {e}"))),
        }
    }
}

impl ImageGenerator for RemoteClient {
    fn generate(&self, prompt: &str, condition: Option<&Raster>) -> Result<Raster, BackendError> {
        let req = GenerateRequest {
            v: WIRE_VERSION,
            prompt: prompt.to_string(),
            condition: condition.map(png_base64),
        };
        let p: ImagePayload = self.call(BackendKind::Generate, &req)?;
        raster_from_base64(&p.image).map_err(malformed)
    }
}

impl Simplifier for RemoteClient {
    fn simplify(&self, img: &Raster, start_step: u32, step_count: u32) -> Result<Vec<Raster>, BackendError> {
        let req = SimplifyRequest {
            v: WIRE_VERSION,
            image: png_base64(img),
            start_step,
            step_count,
        };
        let p: FramesPayload = self.call(BackendKind::Simplify, &req)?;
        if p.frames.len() != step_count as usize {
            return Err(BackendError::Malformed(format!(
                "expected {step_count} frames, got {}",
                p.frames.len()
            )));
        }
        p.frames.iter().map(|f| raster_from_base64(f).map_err(malformed)).collect()
    }
}

impl Segmenter for RemoteClient {
    fn segment(&self, img: &Raster) -> Result<Vec<BinaryMask>, BackendError> {
        let req = ImageRequest {
            v: WIRE_VERSION,
            image: png_base64(img),
        };
        let p: MasksPayload = self.call(BackendKind::Segment, &req)?;
        p.masks
            .iter()
            .map(|m| {
                let mask = BinaryMask::try_from(m).map_err(malformed)?;
                if mask.dimensions() != img.dimensions() {
                    return Err(BackendError::Malformed(format!(
                        "mask is {:?}, image is {:?}",
                        mask.dimensions(),
                        img.dimensions()
                    )));
                }
                Ok(mask)
            })
            .collect()
    }
}

impl AttributeScorer for RemoteClient {
    fn score_attributes(&self, candidate: &Concept, base: &Concept) -> Result<Scored, BackendError> {
        let req = ScoreRequest {
            v: WIRE_VERSION,
            candidate: candidate.clone(),
            base: base.clone(),
        };
        let p: ScorePayload = self.call(BackendKind::Score, &req)?;
        let RawScores { c, f, i, m } = p.scores;
        let (scores, clamped) = AttributeScores::clamped(c, f, i, m);
        if clamped {
            log::warn!("clamped out-of-range scores for `{}`: {:?}", candidate.label(), p.scores);
        }
        Ok(Scored {
            scores,
            interpretation: p.interpretation,
            category: p.category,
            clamped,
        })
    }
}

impl ConceptExpander for RemoteClient {
    fn expand_concepts(&self, input: &Concept, known: &BTreeSet<String>) -> Result<Expansion, BackendError> {
        let req = ExpandRequest {
            v: WIRE_VERSION,
            input: input.clone(),
            known: known.iter().cloned().collect(),
        };
        let p: ExpandPayload = self.call(BackendKind::Expand, &req)?;
        let mut seen = known.clone();
        let concepts = p
            .concepts
            .into_iter()
            .filter(|c| seen.insert(c.label().to_string()))
            .collect();
        Ok(Expansion {
            concepts,
            warnings: p.warnings,
        })
    }
}

impl FeatureExtractor for RemoteClient {
    fn extract_features(&self, img: &Raster) -> Result<FeatureVector, BackendError> {
        let req = ImageRequest {
            v: WIRE_VERSION,
            image: png_base64(img),
        };
        let p: FeaturesPayload = self.call(BackendKind::Features, &req)?;
        FeatureVector::new(p.values).ok_or_else(|| BackendError::Malformed("empty or non-finite feature vector".into()))
    }
}

impl PerceptualMetric for RemoteClient {
    fn distance(&self, a: &Raster, b: &Raster) -> Result<f64, BackendError> {
        let req = PerceptualRequest {
            v: WIRE_VERSION,
            a: png_base64(a),
            b: png_base64(b),
        };
        let p: DistancePayload = self.call(BackendKind::Perceptual, &req)?;
        if !p.distance.is_finite() || p.distance < 0.0 {
            return Err(BackendError::Malformed(format!("distance {}", p.distance)));
        }
        Ok(p.distance)
    }
}

impl Restyler for RemoteClient {
    fn restyle(&self, img: &Raster, variant: StyleVariant) -> Result<Raster, BackendError> {
        let req = RestyleRequest {
            v: WIRE_VERSION,
            image: png_base64(img),
            variant,
        };
        let p: ImagePayload = self.call(BackendKind::Restyle, &req)?;
        raster_from_base64(&p.image).map_err(malformed)
    }
}

#[derive(Deserialize)]
struct CnNode {
    #[serde(rename = "@id")]
    id: String,
    #[serde(default)]
    label: Option<String>,
}

#[derive(Deserialize)]
struct CnRel {
    #[serde(rename = "@id")]
    id: String,
}

#[derive(Deserialize)]
struct CnEdge {
    rel: CnRel,
    start: CnNode,
    end: CnNode,
    #[serde(default = "one")]
    weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
struct CnPage {
    #[serde(default)]
    edges: Vec<CnEdge>,
}

/// `/c/en/fast_food` for "fast food".
pub fn conceptnet_node(label: &str) -> String {
    format!("/c/en/{}", label.trim().to_lowercase().replace(' ', "_"))
}

fn node_term(id: &str) -> Option<&str> {
    id.strip_prefix("/c/en/").map(|rest| rest.split('/').next().unwrap_or(rest))
}

/// Maps one page of ConceptNet edges to relations whose subject is
/// `center`. Edges in other languages or with unmapped relations are
/// skipped.
pub fn parse_conceptnet(center: &Concept, json: &str) -> Result<Vec<SemanticRelation>, BackendError> {
    let page: CnPage = serde_json::from_str(json).map_err(|e| BackendError::Malformed(e.to_string()))?;
    let subject = conceptnet_node(center.label());
    let center_term = node_term(&subject).unwrap_or_default().to_string();
    Ok(page
        .edges
        .iter()
        .filter(|e| node_term(&e.start.id) == Some(center_term.as_str()))
        .filter_map(|e| {
            let relation = conceptnet_relation(&e.rel.id)?;
            let term = node_term(&e.end.id)?;
            let object = e.end.label.clone().unwrap_or_else(|| term.replace('_', " "));
            Some(SemanticRelation::new(
                center.label(),
                relation,
                &object,
                KnowledgeSource::ConceptNet,
                e.weight,
            ))
        })
        .collect())
}

/// Relation lookup against a ConceptNet-compatible `/query` endpoint.
#[derive(Clone, Debug)]
pub struct ConceptNetClient {
    base_url: String,
    agent: ureq::Agent,
    limit: u32,
}

impl ConceptNetClient {
    pub fn new(base_url: &str, timeout_secs: u64) -> Self {
        Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            agent: agent(timeout_secs),
            limit: 200,
        }
    }
}

impl RelationProvider for ConceptNetClient {
    fn relations(&self, center: &Concept) -> Result<Vec<SemanticRelation>, BackendError> {
        let url = format!("{}/query", self.base_url);
        let mut response = self
            .agent
            .get(&url)
            .query("start", conceptnet_node(center.label()))
            .query("limit", self.limit.to_string())
            .call()
            .map_err(|e| transport_error(&url, e))?;
        let status = response.status().as_u16();
        if status >= 500 {
            return Err(BackendError::Unavailable(format!("{url}: HTTP {status}")));
        }
        let text = response
            .body_mut()
            .with_config()
            .limit(BODY_LIMIT)
            .read_to_string()
            .map_err(|e| transport_error(&url, e))?;
        if status >= 400 {
            return Err(BackendError::Malformed(format!("{url}: HTTP {status}")));
        }
        parse_conceptnet(center, &text)
    }
}
