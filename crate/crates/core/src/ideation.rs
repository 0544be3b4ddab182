//! Concept ideation: expand an input concept into concrete candidates, score
//! them, and rank the survivors over several rounds.
//!
//! Each round asks the expander for concepts not yet in the pool, scores the
//! new ones once (scores are cached per label), then runs
//! [`filter_constraints`] → [`threshold_filter`] → [`aggregate_rank`]. The
//! loop stops when the top-five label set repeats between consecutive rounds
//! or the iteration cap is reached.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::backend::{AttributeScorer, BackendError, ConceptExpander};

/// Size of the label set compared between rounds.
pub const TOP_SET_SIZE: usize = 5;

pub const MIN_CONCRETENESS: u8 = 4;
pub const MIN_FAMILIARITY: u8 = 5;
pub const MIN_IMAGEABILITY: u8 = 5;
pub const MIN_MEANINGFULNESS: u8 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConceptSource {
    KnowledgeBase,
    LanguageModel,
    User,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("concept label must not be blank")]
pub struct BlankLabel;

/// A concept with a normalized (trimmed, lowercase) label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ConceptRepr")]
pub struct Concept {
    label: String,
    gloss: String,
    source: ConceptSource,
}

#[derive(Deserialize)]
struct ConceptRepr {
    label: String,
    #[serde(default)]
    gloss: String,
    source: ConceptSource,
}

impl TryFrom<ConceptRepr> for Concept {
    type Error = BlankLabel;

    fn try_from(r: ConceptRepr) -> Result<Self, BlankLabel> {
        Concept::new(&r.label, &r.gloss, r.source)
    }
}

/// Trims and lowercases a label.
pub fn normalize_label(label: &str) -> String {
    label.trim().to_lowercase()
}

impl Concept {
    pub fn new(label: &str, gloss: &str, source: ConceptSource) -> Result<Self, BlankLabel> {
        let label = normalize_label(label);
        if label.is_empty() {
            return Err(BlankLabel);
        }
        Ok(Self {
            label,
            gloss: gloss.trim().to_string(),
            source,
        })
    }

    pub fn user(label: &str) -> Result<Self, BlankLabel> {
        Self::new(label, "", ConceptSource::User)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn gloss(&self) -> &str {
        &self.gloss
    }

    pub fn source(&self) -> ConceptSource {
        self.source
    }
}

/// Psycholinguistic ratings on their native scales: concreteness 1–5,
/// familiarity 1–7, imageability 1–7, meaningfulness 1–9.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ScoresRepr", into = "ScoresRepr")]
pub struct AttributeScores {
    concreteness: u8,
    familiarity: u8,
    imageability: u8,
    meaningfulness: u8,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
struct ScoresRepr {
    c: u8,
    f: u8,
    i: u8,
    m: u8,
}

impl TryFrom<ScoresRepr> for AttributeScores {
    type Error = &'static str;

    fn try_from(r: ScoresRepr) -> Result<Self, Self::Error> {
        AttributeScores::new(r.c, r.f, r.i, r.m).ok_or("attribute score out of range")
    }
}

impl From<AttributeScores> for ScoresRepr {
    fn from(s: AttributeScores) -> Self {
        ScoresRepr {
            c: s.concreteness,
            f: s.familiarity,
            i: s.imageability,
            m: s.meaningfulness,
        }
    }
}

impl AttributeScores {
    pub const CONCRETENESS_MAX: u8 = 5;
    pub const FAMILIARITY_MAX: u8 = 7;
    pub const IMAGEABILITY_MAX: u8 = 7;
    pub const MEANINGFULNESS_MAX: u8 = 9;

    pub fn new(concreteness: u8, familiarity: u8, imageability: u8, meaningfulness: u8) -> Option<Self> {
        let ok = (1..=Self::CONCRETENESS_MAX).contains(&concreteness)
            && (1..=Self::FAMILIARITY_MAX).contains(&familiarity)
            && (1..=Self::IMAGEABILITY_MAX).contains(&imageability)
            && (1..=Self::MEANINGFULNESS_MAX).contains(&meaningfulness);
        ok.then_some(Self {
            concreteness,
            familiarity,
            imageability,
            meaningfulness,
        })
    }

    /// Clamps arbitrary values into range; the flag reports whether any
    /// value had to move.
    pub fn clamped(concreteness: i64, familiarity: i64, imageability: i64, meaningfulness: i64) -> (Self, bool) {
        let clamp = |v: i64, max: u8| v.clamp(1, max as i64) as u8;
        let s = Self {
            concreteness: clamp(concreteness, Self::CONCRETENESS_MAX),
            familiarity: clamp(familiarity, Self::FAMILIARITY_MAX),
            imageability: clamp(imageability, Self::IMAGEABILITY_MAX),
            meaningfulness: clamp(meaningfulness, Self::MEANINGFULNESS_MAX),
        };
        let moved = s.concreteness as i64 != concreteness
            || s.familiarity as i64 != familiarity
            || s.imageability as i64 != imageability
            || s.meaningfulness as i64 != meaningfulness;
        (s, moved)
    }

    pub fn concreteness(&self) -> u8 {
        self.concreteness
    }

    pub fn familiarity(&self) -> u8 {
        self.familiarity
    }

    pub fn imageability(&self) -> u8 {
        self.imageability
    }

    pub fn meaningfulness(&self) -> u8 {
        self.meaningfulness
    }

    /// Each attribute min-max normalized over its own scale, in the order
    /// concreteness, familiarity, imageability, meaningfulness.
    pub fn normalized(&self) -> [f64; 4] {
        let norm = |v: u8, max: u8| (v - 1) as f64 / (max - 1) as f64;
        [
            norm(self.concreteness, Self::CONCRETENESS_MAX),
            norm(self.familiarity, Self::FAMILIARITY_MAX),
            norm(self.imageability, Self::IMAGEABILITY_MAX),
            norm(self.meaningfulness, Self::MEANINGFULNESS_MAX),
        ]
    }

    /// The aggregate scaled by 96 (four attributes over the common
    /// denominator 24 of the 4/6/6/8 scale spans), as an exact integer.
    pub fn aggregate_key(&self) -> u32 {
        6 * (self.concreteness as u32 - 1)
            + 4 * (self.familiarity as u32 - 1)
            + 4 * (self.imageability as u32 - 1)
            + 3 * (self.meaningfulness as u32 - 1)
    }

    /// Equal-weight mean of the normalized attributes, in `[0, 1]`.
    pub fn aggregate(&self) -> f64 {
        self.aggregate_key() as f64 / 96.0
    }

    pub fn passes_thresholds(&self) -> bool {
        self.concreteness >= MIN_CONCRETENESS
            && self.familiarity >= MIN_FAMILIARITY
            && self.imageability >= MIN_IMAGEABILITY
            && self.meaningfulness >= MIN_MEANINGFULNESS
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    ConcreteObject,
    AbstractNoun,
    SuperordinateCategory,
    IntangibleAction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "CandidateRepr")]
pub struct CandidateEntry {
    concept: Concept,
    interpretation: String,
    scores: AttributeScores,
    category: Category,
    aggregate: f64,
}

/// The stored aggregate is ignored on input and recomputed from the scores.
#[derive(Deserialize)]
struct CandidateRepr {
    concept: Concept,
    interpretation: String,
    scores: AttributeScores,
    category: Category,
}

impl From<CandidateRepr> for CandidateEntry {
    fn from(r: CandidateRepr) -> Self {
        CandidateEntry::new(r.concept, r.interpretation, r.scores, r.category)
    }
}

impl CandidateEntry {
    pub fn new(concept: Concept, interpretation: String, scores: AttributeScores, category: Category) -> Self {
        Self {
            concept,
            interpretation,
            aggregate: scores.aggregate(),
            scores,
            category,
        }
    }

    pub fn concept(&self) -> &Concept {
        &self.concept
    }

    pub fn label(&self) -> &str {
        self.concept.label()
    }

    pub fn interpretation(&self) -> &str {
        &self.interpretation
    }

    pub fn scores(&self) -> AttributeScores {
        self.scores
    }

    pub fn category(&self) -> Category {
        self.category
    }

    pub fn aggregate(&self) -> f64 {
        self.aggregate
    }
}

/// Keeps concrete objects only, preserving order.
pub fn filter_constraints(pool: Vec<CandidateEntry>) -> Vec<CandidateEntry> {
    pool.into_iter()
        .filter(|e| e.category == Category::ConcreteObject)
        .collect()
}

/// Keeps entries meeting every attribute threshold, preserving order.
pub fn threshold_filter(pool: Vec<CandidateEntry>) -> Vec<CandidateEntry> {
    pool.into_iter().filter(|e| e.scores.passes_thresholds()).collect()
}

fn rank_order(a: &CandidateEntry, b: &CandidateEntry) -> Ordering {
    b.scores
        .aggregate_key()
        .cmp(&a.scores.aggregate_key())
        .then_with(|| a.label().cmp(b.label()))
}

/// Sorts by aggregate descending, ties by label ascending.
pub fn aggregate_rank(mut pool: Vec<CandidateEntry>) -> Vec<CandidateEntry> {
    pool.sort_by(rank_order);
    pool
}

/// The full ranking protocol: constraints, thresholds, then ranking.
pub fn rank_pool(pool: Vec<CandidateEntry>) -> Vec<CandidateEntry> {
    aggregate_rank(threshold_filter(filter_constraints(pool)))
}

fn top_labels(ranked: &[CandidateEntry]) -> BTreeSet<String> {
    ranked
        .iter()
        .take(TOP_SET_SIZE)
        .map(|e| e.label().to_string())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Stabilized,
    IterationCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdeationState {
    pub input: Concept,
    pub iteration: u32,
    pub max_iterations: u32,
    /// Every scored candidate, in discovery order.
    pub pool: Vec<CandidateEntry>,
    /// Survivors of the ranking protocol, best first.
    pub ranked: Vec<CandidateEntry>,
    pub top5_history: Vec<BTreeSet<String>>,
    pub stop_reason: Option<StopReason>,
    /// Degradation notes (failed sources, clamped scores).
    pub warnings: Vec<String>,
}

impl IdeationState {
    fn new(input: Concept, max_iterations: u32) -> Self {
        Self {
            input,
            iteration: 0,
            max_iterations,
            pool: Vec::new(),
            ranked: Vec::new(),
            top5_history: Vec::new(),
            stop_reason: None,
            warnings: Vec::new(),
        }
    }

    fn known_labels(&self) -> BTreeSet<String> {
        let mut known: BTreeSet<String> = self.pool.iter().map(|e| e.label().to_string()).collect();
        known.insert(self.input.label().to_string());
        known
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum IdeationError {
    #[error("max_iterations must be at least 1")]
    InvalidIterationCap,
    /// State holds every iteration completed before the failure.
    #[error("{source}")]
    Backend {
        source: BackendError,
        state: Box<IdeationState>,
    },
    #[error("no candidate survived filtering after {} iterations", state.iteration)]
    EmptyPool { state: Box<IdeationState> },
}

/// Runs rounds of expand → score → rank until the top-five set stabilizes
/// or `max_iterations` rounds have completed.
pub fn run_ideation(
    input: Concept,
    expander: &dyn ConceptExpander,
    scorer: &dyn AttributeScorer,
    max_iterations: u32,
) -> Result<IdeationState, IdeationError> {
    if max_iterations == 0 {
        return Err(IdeationError::InvalidIterationCap);
    }
    let mut state = IdeationState::new(input, max_iterations);
    loop {
        let known = state.known_labels();
        let expansion = match expander.expand_concepts(&state.input, &known) {
            Ok(e) => e,
            Err(source) => {
                return Err(IdeationError::Backend {
                    source,
                    state: Box::new(state),
                })
            }
        };

        let mut fresh = Vec::new();
        let mut warnings = expansion.warnings;
        let mut seen = known;
        for concept in expansion.concepts {
            if !seen.insert(concept.label().to_string()) {
                continue;
            }
            match scorer.score_attributes(&concept, &state.input) {
                Ok(scored) => {
                    if scored.clamped {
                        warnings.push(alloc::format!("scores for `{}` were clamped into range", concept.label()));
                    }
                    fresh.push(CandidateEntry::new(concept, scored.interpretation, scored.scores, scored.category));
                }
                Err(source) => {
                    return Err(IdeationError::Backend {
                        source,
                        state: Box::new(state),
                    })
                }
            }
        }

        state.pool.extend(fresh);
        state.warnings.extend(warnings);
        state.ranked = rank_pool(state.pool.clone());
        state.iteration += 1;
        let top = top_labels(&state.ranked);
        let stable = state.top5_history.last() == Some(&top);
        state.top5_history.push(top);

        if stable {
            state.stop_reason = Some(StopReason::Stabilized);
            break;
        }
        if state.iteration >= max_iterations {
            state.stop_reason = Some(StopReason::IterationCap);
            break;
        }
    }
    if state.ranked.is_empty() {
        return Err(IdeationError::EmptyPool { state: Box::new(state) });
    }
    Ok(state)
}
