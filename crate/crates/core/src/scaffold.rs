//! Semantic scaffold: knowledge-base relations bucketed into three
//! dimensions, and the chained three-view prompt plan built from them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, ImageGenerator};
use crate::ideation::{normalize_label, Concept};
use crate::imaging::Raster;

/// Maximum relations kept per dimension.
pub const BUCKET_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Hypernym,
    Hyponym,
    Synonym,
    KindOf,
    InstanceOf,
    PartOf,
    AttributeOf,
    UsedFor,
    AtLocation,
    RelatedTo,
    SymbolOf,
    SimilarTo,
}

impl RelationKind {
    pub const ALL: [RelationKind; 12] = [
        RelationKind::Hypernym,
        RelationKind::Hyponym,
        RelationKind::Synonym,
        RelationKind::KindOf,
        RelationKind::InstanceOf,
        RelationKind::PartOf,
        RelationKind::AttributeOf,
        RelationKind::UsedFor,
        RelationKind::AtLocation,
        RelationKind::RelatedTo,
        RelationKind::SymbolOf,
        RelationKind::SimilarTo,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Taxonomic,
    Constitutive,
    Associative,
}

pub fn classify_relation(kind: RelationKind) -> Dimension {
    use RelationKind::*;
    match kind {
        Hypernym | Hyponym | Synonym | KindOf | InstanceOf => Dimension::Taxonomic,
        PartOf | AttributeOf => Dimension::Constitutive,
        UsedFor | AtLocation | RelatedTo | SymbolOf | SimilarTo => Dimension::Associative,
    }
}

/// Maps a ConceptNet relation URI (e.g. `/r/IsA`) onto a relation kind.
/// Relations outside the table are dropped by callers.
pub fn conceptnet_relation(uri: &str) -> Option<RelationKind> {
    use RelationKind::*;
    Some(match uri.trim_end_matches('/') {
        "/r/IsA" => KindOf,
        "/r/InstanceOf" => InstanceOf,
        "/r/Synonym" => Synonym,
        "/r/PartOf" | "/r/HasA" | "/r/MadeOf" => PartOf,
        "/r/HasProperty" => AttributeOf,
        "/r/UsedFor" => UsedFor,
        "/r/AtLocation" | "/r/LocatedNear" => AtLocation,
        "/r/RelatedTo" => RelatedTo,
        "/r/SymbolOf" => SymbolOf,
        "/r/SimilarTo" => SimilarTo,
        _ => return None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnowledgeSource {
    ConceptNet,
    Lexicon,
    Wikidata,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemanticRelation {
    pub subject: String,
    pub relation: RelationKind,
    pub object: String,
    pub source: KnowledgeSource,
    pub weight: f64,
}

impl SemanticRelation {
    pub fn new(subject: &str, relation: RelationKind, object: &str, source: KnowledgeSource, weight: f64) -> Self {
        Self {
            subject: normalize_label(subject),
            relation,
            object: normalize_label(object),
            source,
            weight,
        }
    }

    pub fn dimension(&self) -> Dimension {
        classify_relation(self.relation)
    }

    pub fn key(&self) -> RelationKey {
        RelationKey {
            relation: self.relation,
            object: self.object.clone(),
        }
    }
}

/// Identifies a relation within one scaffold.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationKey {
    pub relation: RelationKind,
    pub object: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaffold {
    pub center: Concept,
    pub taxonomic: Vec<SemanticRelation>,
    pub constitutive: Vec<SemanticRelation>,
    pub associative: Vec<SemanticRelation>,
}

impl Scaffold {
    pub fn bucket(&self, dim: Dimension) -> &[SemanticRelation] {
        match dim {
            Dimension::Taxonomic => &self.taxonomic,
            Dimension::Constitutive => &self.constitutive,
            Dimension::Associative => &self.associative,
        }
    }

    pub fn find(&self, dim: Dimension, key: &RelationKey) -> Option<&SemanticRelation> {
        self.bucket(dim)
            .iter()
            .find(|r| r.relation == key.relation && r.object == normalize_label(&key.object))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScaffoldError {
    #[error("relation subject `{subject}` does not match center `{center}`")]
    SubjectMismatch { center: String, subject: String },
    #[error("relation {:?} `{}` is not in the {dimension:?} bucket required by the {view:?} view", key.relation, key.object)]
    SelectionOutOfBucket {
        view: View,
        dimension: Dimension,
        key: RelationKey,
    },
}

/// Deduplicates by (relation, object) keeping the heaviest, buckets by
/// dimension, sorts each bucket by weight descending then object label, and
/// truncates to [`BUCKET_CAP`]. Self-relations are dropped.
pub fn build_scaffold(center: Concept, relations: Vec<SemanticRelation>) -> Result<Scaffold, ScaffoldError> {
    let mut best: BTreeMap<RelationKey, SemanticRelation> = BTreeMap::new();
    for rel in relations {
        if normalize_label(&rel.subject) != center.label() {
            return Err(ScaffoldError::SubjectMismatch {
                center: center.label().to_string(),
                subject: rel.subject,
            });
        }
        if rel.object == center.label() || rel.object.is_empty() {
            continue;
        }
        let key = rel.key();
        match best.get(&key) {
            Some(existing) if existing.weight >= rel.weight => {}
            _ => {
                best.insert(key, rel);
            }
        }
    }

    let mut scaffold = Scaffold {
        center,
        taxonomic: Vec::new(),
        constitutive: Vec::new(),
        associative: Vec::new(),
    };
    for rel in best.into_values() {
        match rel.dimension() {
            Dimension::Taxonomic => scaffold.taxonomic.push(rel),
            Dimension::Constitutive => scaffold.constitutive.push(rel),
            Dimension::Associative => scaffold.associative.push(rel),
        }
    }
    for bucket in [&mut scaffold.taxonomic, &mut scaffold.constitutive, &mut scaffold.associative] {
        bucket.sort_by(|a, b| {
            b.weight
                .total_cmp(&a.weight)
                .then_with(|| a.object.cmp(&b.object))
                .then_with(|| a.relation.cmp(&b.relation))
        });
        bucket.truncate(BUCKET_CAP);
    }
    Ok(scaffold)
}

/// The three exemplar views, in chain order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    Comparative,
    Microscopic,
    Macroscopic,
}

impl View {
    pub const CHAIN: [View; 3] = [View::Comparative, View::Microscopic, View::Macroscopic];

    pub const fn dimension(self) -> Dimension {
        match self {
            View::Comparative => Dimension::Taxonomic,
            View::Microscopic => Dimension::Constitutive,
            View::Macroscopic => Dimension::Associative,
        }
    }

    /// Grid semantic level: 1 = Comparative … 3 = Macroscopic.
    pub const fn semantic_level(self) -> u8 {
        match self {
            View::Comparative => 1,
            View::Microscopic => 2,
            View::Macroscopic => 3,
        }
    }

    pub fn from_semantic_level(level: u8) -> Option<Self> {
        Self::CHAIN.into_iter().find(|v| v.semantic_level() == level)
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            View::Comparative => "comparative",
            View::Microscopic => "microscopic",
            View::Macroscopic => "macroscopic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::CHAIN.into_iter().find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
    }

    pub const fn index(self) -> usize {
        self.semantic_level() as usize - 1
    }
}

/// Relations chosen per view.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Selections {
    pub comparative: Vec<RelationKey>,
    pub microscopic: Vec<RelationKey>,
    pub macroscopic: Vec<RelationKey>,
}

impl Selections {
    pub fn for_view(&self, view: View) -> &[RelationKey] {
        match view {
            View::Comparative => &self.comparative,
            View::Microscopic => &self.microscopic,
            View::Macroscopic => &self.macroscopic,
        }
    }

    fn for_view_mut(&mut self, view: View) -> &mut Vec<RelationKey> {
        match view {
            View::Comparative => &mut self.comparative,
            View::Microscopic => &mut self.microscopic,
            View::Macroscopic => &mut self.macroscopic,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.comparative.is_empty() && self.microscopic.is_empty() && self.macroscopic.is_empty()
    }

    /// The `n` heaviest relations of each view's bucket.
    pub fn top_by_weight(scaffold: &Scaffold, n: usize) -> Self {
        let mut s = Self::default();
        for view in View::CHAIN {
            *s.for_view_mut(view) = scaffold
                .bucket(view.dimension())
                .iter()
                .take(n)
                .map(SemanticRelation::key)
                .collect();
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptStep {
    pub view: View,
    pub prompt: String,
    pub selected_relations: Vec<SemanticRelation>,
    /// Index of the step whose image conditions this one.
    pub conditions_on: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptChain {
    pub center: String,
    pub steps: Vec<PromptStep>,
}

impl PromptChain {
    /// Replaces the prompt text of one view, ignoring blank edits.
    pub fn edit_prompt(&mut self, view: View, prompt: &str) {
        if !prompt.trim().is_empty() {
            self.steps[view.index()].prompt = prompt.trim().to_string();
        }
    }

    /// Steps are in chain order and each conditions on its predecessor.
    pub fn is_linear(&self) -> bool {
        self.steps.len() == 3
            && self.steps.iter().enumerate().all(|(i, s)| {
                s.view == View::CHAIN[i] && s.conditions_on == i.checked_sub(1) && !s.prompt.is_empty()
            })
    }
}

fn render_prompt(view: View, center: &str, objects: &[&str]) -> String {
    let mut prompt = format!("a clean icon-style illustration of {center}");
    if !objects.is_empty() {
        let clause = match view {
            View::Comparative => "compare with",
            View::Microscopic => "depict parts",
            View::Macroscopic => "set in context",
        };
        prompt.push_str(&format!("; {clause}: {}", objects.join(", ")));
    }
    prompt
}

/// Renders the three view prompts from fixed templates.
pub fn build_prompt_chain(scaffold: &Scaffold, selections: &Selections) -> Result<PromptChain, ScaffoldError> {
    let center = scaffold.center.label();
    let mut steps = Vec::with_capacity(3);
    for (i, view) in View::CHAIN.into_iter().enumerate() {
        let dimension = view.dimension();
        let mut chosen: Vec<SemanticRelation> = Vec::new();
        for key in selections.for_view(view) {
            let rel = scaffold
                .find(dimension, key)
                .ok_or_else(|| ScaffoldError::SelectionOutOfBucket {
                    view,
                    dimension,
                    key: key.clone(),
                })?;
            if !chosen.iter().any(|c| c.key() == rel.key()) {
                chosen.push(rel.clone());
            }
        }
        let objects: Vec<&str> = chosen.iter().map(|r| r.object.as_str()).collect();
        steps.push(PromptStep {
            view,
            prompt: render_prompt(view, center, &objects),
            selected_relations: chosen,
            conditions_on: i.checked_sub(1),
        });
    }
    Ok(PromptChain {
        center: center.to_string(),
        steps,
    })
}

/// Images produced by a chain run; stops at the first failure.
#[derive(Clone, Debug)]
pub struct ExemplarRun {
    pub images: Vec<(View, Raster)>,
    pub failed: Option<(View, BackendError)>,
}

impl ExemplarRun {
    pub fn is_complete(&self) -> bool {
        self.failed.is_none() && self.images.len() == 3
    }
}

/// Generates step 0 from its prompt alone and every later step from its
/// prompt plus the previous step's image.
pub fn generate_exemplar_chain(chain: &PromptChain, gen: &dyn ImageGenerator) -> ExemplarRun {
    let mut images: Vec<(View, Raster)> = Vec::with_capacity(3);
    for step in &chain.steps {
        let condition = step.conditions_on.map(|i| &images[i].1);
        match gen.generate(&step.prompt, condition) {
            Ok(img) => images.push((step.view, img)),
            Err(e) => {
                return ExemplarRun {
                    images,
                    failed: Some((step.view, e)),
                }
            }
        }
    }
    ExemplarRun { images, failed: None }
}
