//! Model-backed steps behind object-safe traits.
//!
//! Every generative or learned step of the pipeline is reached only through
//! these traits. [`mock`] holds deterministic implementations (and the
//! reference fallbacks for features, perceptual distance and
//! simplification); HTTP clients implementing the same traits live in the
//! companion crate.

mod fixtures;
pub mod mock;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ideation::{AttributeScores, Category, Concept};
use crate::imaging::{BinaryMask, Raster};
use crate::scaffold::SemanticRelation;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("backend timed out: {0}")]
    Timeout(String),
    #[error("malformed backend response: {0}")]
    Malformed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Generate,
    Simplify,
    Segment,
    Score,
    Expand,
    Features,
    Perceptual,
    Restyle,
}

impl BackendKind {
    pub const ALL: [BackendKind; 8] = [
        BackendKind::Generate,
        BackendKind::Simplify,
        BackendKind::Segment,
        BackendKind::Score,
        BackendKind::Expand,
        BackendKind::Features,
        BackendKind::Perceptual,
        BackendKind::Restyle,
    ];

    /// Path segment used by the wire protocol (`/v1/{kind}`).
    pub const fn as_str(self) -> &'static str {
        match self {
            BackendKind::Generate => "generate",
            BackendKind::Simplify => "simplify",
            BackendKind::Segment => "segment",
            BackendKind::Score => "score",
            BackendKind::Expand => "expand",
            BackendKind::Features => "features",
            BackendKind::Perceptual => "perceptual",
            BackendKind::Restyle => "restyle",
        }
    }

    /// Upper-case form used in environment variable names.
    pub const fn env_name(self) -> &'static str {
        match self {
            BackendKind::Generate => "GENERATE",
            BackendKind::Simplify => "SIMPLIFY",
            BackendKind::Segment => "SEGMENT",
            BackendKind::Score => "SCORE",
            BackendKind::Expand => "EXPAND",
            BackendKind::Features => "FEATURES",
            BackendKind::Perceptual => "PERCEPTUAL",
            BackendKind::Restyle => "RESTYLE",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    Remote,
    Mock,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendEndpoint {
    pub kind: BackendKind,
    pub url: String,
    pub timeout_secs: u64,
    pub mode: BackendMode,
}

impl BackendEndpoint {
    pub fn mock(kind: BackendKind) -> Self {
        Self {
            kind,
            url: String::new(),
            timeout_secs: 30,
            mode: BackendMode::Mock,
        }
    }

    /// Remote endpoints need a URL; mock endpoints ignore it.
    pub fn is_valid(&self) -> bool {
        self.mode == BackendMode::Mock || !self.url.trim().is_empty()
    }
}

/// Embedding of one image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    /// `None` for empty vectors or non-finite entries.
    pub fn new(values: Vec<f64>) -> Option<Self> {
        (!values.is_empty() && values.iter().all(|v| v.is_finite())).then_some(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for FeatureVector {
    type Error = &'static str;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values).ok_or("feature vector must be non-empty and finite")
    }
}

impl From<FeatureVector> for Vec<f64> {
    fn from(v: FeatureVector) -> Self {
        v.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StyleVariant {
    Outline,
    Filled,
    Color,
}

impl StyleVariant {
    pub const ALL: [StyleVariant; 3] = [StyleVariant::Outline, StyleVariant::Filled, StyleVariant::Color];

    pub const fn as_str(self) -> &'static str {
        match self {
            StyleVariant::Outline => "outline",
            StyleVariant::Filled => "filled",
            StyleVariant::Color => "color",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

/// Result of scoring one candidate against the input concept.
#[derive(Clone, Debug, PartialEq)]
pub struct Scored {
    pub scores: AttributeScores,
    pub interpretation: String,
    pub category: Category,
    /// Set when the backend reported out-of-range values that were clamped.
    pub clamped: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expansion {
    pub concepts: Vec<Concept>,
    pub warnings: Vec<String>,
}

pub trait ImageGenerator {
    fn generate(&self, prompt: &str, condition: Option<&Raster>) -> Result<Raster, BackendError>;
}

/// Progressive simplification. `start_step` is the sequence index of `img`;
/// the result holds frames `start_step + 1 ..= start_step + step_count`.
pub trait Simplifier {
    fn simplify(&self, img: &Raster, start_step: u32, step_count: u32) -> Result<Vec<Raster>, BackendError>;
}

pub trait Segmenter {
    fn segment(&self, img: &Raster) -> Result<Vec<BinaryMask>, BackendError>;
}

pub trait AttributeScorer {
    fn score_attributes(&self, candidate: &Concept, base: &Concept) -> Result<Scored, BackendError>;
}

pub trait ConceptExpander {
    /// Concepts related to `input` that are not already in `known`.
    fn expand_concepts(&self, input: &Concept, known: &BTreeSet<String>) -> Result<Expansion, BackendError>;
}

pub trait FeatureExtractor {
    fn extract_features(&self, img: &Raster) -> Result<FeatureVector, BackendError>;
}

pub trait PerceptualMetric {
    fn distance(&self, a: &Raster, b: &Raster) -> Result<f64, BackendError>;
}

pub trait Restyler {
    fn restyle(&self, img: &Raster, variant: StyleVariant) -> Result<Raster, BackendError>;
}

/// Knowledge-base lookup of relations whose subject is `center`.
pub trait RelationProvider {
    fn relations(&self, center: &Concept) -> Result<Vec<SemanticRelation>, BackendError>;
}

/// Expander that merges two sources, tolerating one failure.
///
/// Results keep first-seen order (primary first) and are deduplicated by
/// label. A single failing source is downgraded to a warning; both failing
/// returns the primary's error.
pub struct MergedExpander<A, B> {
    pub primary: A,
    pub secondary: B,
}

impl<A: ConceptExpander, B: ConceptExpander> ConceptExpander for MergedExpander<A, B> {
    fn expand_concepts(&self, input: &Concept, known: &BTreeSet<String>) -> Result<Expansion, BackendError> {
        let first = self.primary.expand_concepts(input, known);
        let second = self.secondary.expand_concepts(input, known);
        let mut out = Expansion::default();
        let mut seen: BTreeSet<String> = known.clone();
        let mut push_all = |e: Expansion, out: &mut Expansion| {
            out.warnings.extend(e.warnings);
            for c in e.concepts {
                if seen.insert(c.label().into()) {
                    out.concepts.push(c);
                }
            }
        };
        match (first, second) {
            (Err(e), Err(_)) => return Err(e),
            (Ok(a), Ok(b)) => {
                push_all(a, &mut out);
                push_all(b, &mut out);
            }
            (Ok(a), Err(e)) => {
                push_all(a, &mut out);
                out.warnings.push(alloc::format!("secondary expansion source failed: {e}"));
            }
            (Err(e), Ok(b)) => {
                push_all(b, &mut out);
                out.warnings.push(alloc::format!("primary expansion source failed: {e}"));
            }
        }
        Ok(out)
    }
}

/// One implementation per pipeline role.
pub struct BackendSet {
    pub generator: Box<dyn ImageGenerator + Send + Sync>,
    pub simplifier: Box<dyn Simplifier + Send + Sync>,
    pub segmenter: Box<dyn Segmenter + Send + Sync>,
    pub scorer: Box<dyn AttributeScorer + Send + Sync>,
    pub expander: Box<dyn ConceptExpander + Send + Sync>,
    pub features: Box<dyn FeatureExtractor + Send + Sync>,
    pub metric: Box<dyn PerceptualMetric + Send + Sync>,
    pub restyler: Box<dyn Restyler + Send + Sync>,
    pub relations: Box<dyn RelationProvider + Send + Sync>,
}

impl BackendSet {
    /// Fully offline set: mocks and reference implementations only.
    pub fn mock() -> Self {
        Self {
            generator: Box::new(mock::MockGenerator::default()),
            simplifier: Box::new(mock::ReferenceSimplifier::default()),
            segmenter: Box::new(mock::MockSegmenter::default()),
            scorer: Box::new(mock::MockScorer),
            expander: Box::new(mock::mock_expander()),
            features: Box::new(mock::ReferenceFeatures),
            metric: Box::new(mock::ReferenceMetric),
            restyler: Box::new(mock::MockRestyler::default()),
            relations: Box::new(mock::MockKnowledgeBase),
        }
    }
}

impl<T: ImageGenerator + ?Sized> ImageGenerator for &T {
    fn generate(&self, prompt: &str, condition: Option<&Raster>) -> Result<Raster, BackendError> {
        (**self).generate(prompt, condition)
    }
}

impl<T: Simplifier + ?Sized> Simplifier for &T {
    fn simplify(&self, img: &Raster, start_step: u32, step_count: u32) -> Result<Vec<Raster>, BackendError> {
        (**self).simplify(img, start_step, step_count)
    }
}

impl<T: Segmenter + ?Sized> Segmenter for &T {
    fn segment(&self, img: &Raster) -> Result<Vec<BinaryMask>, BackendError> {
        (**self).segment(img)
    }
}

impl<T: AttributeScorer + ?Sized> AttributeScorer for &T {
    fn score_attributes(&self, candidate: &Concept, base: &Concept) -> Result<Scored, BackendError> {
        (**self).score_attributes(candidate, base)
    }
}

impl<T: ConceptExpander + ?Sized> ConceptExpander for &T {
    fn expand_concepts(&self, input: &Concept, known: &BTreeSet<String>) -> Result<Expansion, BackendError> {
        (**self).expand_concepts(input, known)
    }
}

impl<T: FeatureExtractor + ?Sized> FeatureExtractor for &T {
    fn extract_features(&self, img: &Raster) -> Result<FeatureVector, BackendError> {
        (**self).extract_features(img)
    }
}

impl<T: PerceptualMetric + ?Sized> PerceptualMetric for &T {
    fn distance(&self, a: &Raster, b: &Raster) -> Result<f64, BackendError> {
        (**self).distance(a, b)
    }
}

impl<T: Restyler + ?Sized> Restyler for &T {
    fn restyle(&self, img: &Raster, variant: StyleVariant) -> Result<Raster, BackendError> {
        (**self).restyle(img, variant)
    }
}

impl<T: RelationProvider + ?Sized> RelationProvider for &T {
    fn relations(&self, center: &Concept) -> Result<Vec<SemanticRelation>, BackendError> {
        (**self).relations(center)
    }
}
