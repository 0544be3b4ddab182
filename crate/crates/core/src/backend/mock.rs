//! Deterministic offline backends.
//!
//! Every type here is a pure function of its inputs: no clocks, no global
//! state, no IO. The `Reference*` types double as the no-network fallbacks
//! for feature extraction, perceptual distance and simplification.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::fixtures::{self, ExpansionTable};
use super::{
    AttributeScorer, BackendError, ConceptExpander, Expansion, FeatureExtractor, ImageGenerator,
    MergedExpander, PerceptualMetric, RelationProvider, Restyler, Scored, Segmenter, Simplifier,
    StyleVariant,
};
use crate::backend::FeatureVector;
use crate::ideation::{AttributeScores, Category, Concept, ConceptSource};
use crate::imaging::filter::{
    blur_values, boundary, close_dark, fill_holes, gray_palette, mask_to_gray, requantize, snap_to,
};
use crate::imaging::{
    binarize, connected_components, reference_perceptual_distance, reference_thumbnail, BinaryMask,
    Channels, Connectivity, Raster, DEFAULT_THRESHOLD,
};
use crate::scaffold::{KnowledgeSource, SemanticRelation};

/// SHA-256 over a domain tag and a raster's shape and bytes.
fn raster_digest(tag: &[u8], img: Option<&Raster>, extra: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(tag);
    h.update([0u8]);
    h.update(extra);
    h.update([0u8]);
    if let Some(img) = img {
        h.update(img.width().to_le_bytes());
        h.update(img.height().to_le_bytes());
        h.update([img.channels().count() as u8]);
        h.update(img.data());
    }
    h.finalize().into()
}

/// Side length of mock-generated images.
pub const MOCK_IMAGE_SIDE: u32 = 128;

const INKS: [[u8; 3]; 6] = [
    [40, 40, 48],
    [120, 30, 30],
    [20, 60, 110],
    [30, 90, 50],
    [90, 50, 20],
    [70, 30, 90],
];

const TINTS: [[u8; 3]; 4] = [[240, 200, 120], [200, 230, 240], [250, 180, 170], [210, 240, 190]];

struct Canvas {
    side: i32,
    data: Vec<u8>,
}

impl Canvas {
    fn new(side: u32) -> Self {
        Self {
            side: side as i32,
            data: alloc::vec![255; side as usize * side as usize * 4],
        }
    }

    fn put(&mut self, x: i32, y: i32, c: [u8; 3]) {
        if (0..self.side).contains(&x) && (0..self.side).contains(&y) {
            let i = (y * self.side + x) as usize * 4;
            self.data[i..i + 3].copy_from_slice(&c);
        }
    }

    fn ellipse(&mut self, cx: f64, cy: f64, rx: f64, ry: f64, c: [u8; 3]) {
        for y in 0..self.side {
            for x in 0..self.side {
                let (dx, dy) = ((x as f64 - cx) / rx, (y as f64 - cy) / ry);
                if dx * dx + dy * dy <= 1.0 {
                    self.put(x, y, c);
                }
            }
        }
    }

    fn line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, width: i32, c: [u8; 3]) {
        let steps = libm::ceil(libm::hypot(x1 - x0, y1 - y0)).max(1.0) as i32;
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let (x, y) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            for oy in 0..width {
                for ox in 0..width {
                    self.put(libm::round(x) as i32 + ox, libm::round(y) as i32 + oy, c);
                }
            }
        }
    }

    fn into_raster(self) -> Raster {
        Raster::new(self.side as u32, self.side as u32, Channels::Rgba8, self.data).expect("square canvas")
    }
}

/// Mean colour of the dark foreground of `img`, if it has any.
fn foreground_ink(img: &Raster) -> Option<[u8; 3]> {
    let mask = binarize(img, DEFAULT_THRESHOLD);
    if mask.is_empty() {
        return None;
    }
    let rgba = img.to_rgba();
    let mut sum = [0u64; 3];
    for i in mask.indices() {
        let p = &rgba.data()[i * 4..i * 4 + 3];
        for k in 0..3 {
            sum[k] += p[k] as u64;
        }
    }
    let n = mask.area() as u64;
    Some(sum.map(|s| ((2 * s + n) / (2 * n)) as u8))
}

/// Procedural icon-like drawings seeded by `hash(prompt ‖ condition)`.
///
/// A large dark body is drawn near the centre with a handful of detail
/// blobs (at least two detached) and light strokes across it. When a
/// conditioning image is given, its ink colour is reused for the body.
#[derive(Clone, Debug)]
pub struct MockGenerator {
    pub side: u32,
}

impl Default for MockGenerator {
    fn default() -> Self {
        Self { side: MOCK_IMAGE_SIDE }
    }
}

impl ImageGenerator for MockGenerator {
    fn generate(&self, prompt: &str, condition: Option<&Raster>) -> Result<Raster, BackendError> {
        let seed = raster_digest(b"generate", condition, prompt.as_bytes());
        let mut rng = ChaCha8Rng::from_seed(seed);
        let side = self.side as f64;
        let mut canvas = Canvas::new(self.side);

        let ink = condition
            .and_then(foreground_ink)
            .unwrap_or(INKS[rng.random_range(0..INKS.len())]);
        let (cx, cy) = (side / 2.0 + rng.random_range(-0.06..0.06) * side, side / 2.0 + rng.random_range(-0.06..0.06) * side);
        let (rx, ry) = (rng.random_range(0.2..0.3) * side, rng.random_range(0.17..0.28) * side);
        canvas.ellipse(cx, cy, rx, ry, ink);

        let details = rng.random_range(3..=6);
        for d in 0..details {
            let angle = rng.random_range(0.0..core::f64::consts::TAU);
            // The first two always float free of the body.
            let reach = if d < 2 { rng.random_range(1.35..1.6) } else { rng.random_range(0.6..1.2) };
            let r = rng.random_range(0.03..0.07) * side;
            let (x, y) = (cx + libm::cos(angle) * rx * reach, cy + libm::sin(angle) * ry * reach);
            let color = if d < 2 || rng.random_bool(0.6) {
                INKS[rng.random_range(0..INKS.len())]
            } else {
                TINTS[rng.random_range(0..TINTS.len())]
            };
            canvas.ellipse(x, y, r, r, color);
        }

        let strokes = rng.random_range(1..=3);
        for _ in 0..strokes {
            let tint = TINTS[rng.random_range(0..TINTS.len())];
            let (a, b) = (rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7));
            canvas.line(cx - rx * 0.6, cy + ry * a, cx + rx * 0.6, cy + ry * b, 2, tint);
        }
        Ok(canvas.into_raster())
    }
}

/// One mask per 8-connected component of the binarized image.
#[derive(Clone, Debug)]
pub struct MockSegmenter {
    pub threshold: u8,
}

impl Default for MockSegmenter {
    fn default() -> Self {
        Self { threshold: DEFAULT_THRESHOLD }
    }
}

impl Segmenter for MockSegmenter {
    fn segment(&self, img: &Raster) -> Result<Vec<BinaryMask>, BackendError> {
        let mask = binarize(img, self.threshold);
        let comps = connected_components(&mask, Connectivity::Eight);
        Ok(comps.masks(img.width(), img.height()))
    }
}

/// Stand-in simplifier: blur with a width that grows linearly with the step
/// index, re-quantize so every gray level keeps its pixel count, then close
/// small gaps in the dark strokes (3×3).
///
/// The first frame is snapped onto an 8-level palette. Holding the
/// histogram fixed keeps the dark area constant, so shapes round off and
/// small detached parts are absorbed instead of everything eroding away.
#[derive(Clone, Debug)]
pub struct ReferenceSimplifier {
    pub levels: usize,
    pub sigma_base: f64,
    pub sigma_slope: f64,
}

impl Default for ReferenceSimplifier {
    fn default() -> Self {
        Self {
            levels: 8,
            sigma_base: 0.5,
            sigma_slope: 0.15,
        }
    }
}

impl ReferenceSimplifier {
    pub fn sigma(&self, step: u32) -> f64 {
        self.sigma_base + self.sigma_slope * step as f64
    }

    /// Frame `step` computed from frame `step − 1`.
    pub fn advance(&self, prev: &Raster, step: u32) -> Raster {
        let snapped = snap_to(prev, &gray_palette(self.levels));
        close_dark(&requantize(&blur_values(&snapped, self.sigma(step)), &snapped))
    }
}

impl Simplifier for ReferenceSimplifier {
    fn simplify(&self, img: &Raster, start_step: u32, step_count: u32) -> Result<Vec<Raster>, BackendError> {
        let mut frames: Vec<Raster> = Vec::with_capacity(step_count as usize);
        for k in 1..=step_count {
            let prev = frames.last().unwrap_or(img);
            let next = self.advance(prev, start_step + k);
            frames.push(next);
        }
        Ok(frames)
    }
}

/// 32×32 grayscale thumbnail, flattened and scaled to `[0, 1]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ReferenceFeatures;

impl FeatureExtractor for ReferenceFeatures {
    fn extract_features(&self, img: &Raster) -> Result<FeatureVector, BackendError> {
        let thumb = reference_thumbnail(img);
        let values = thumb.data().iter().map(|&v| v as f64 / 255.0).collect();
        Ok(FeatureVector::new(values).expect("thumbnail is non-empty and finite"))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ReferenceMetric;

impl PerceptualMetric for ReferenceMetric {
    fn distance(&self, a: &Raster, b: &Raster) -> Result<f64, BackendError> {
        reference_perceptual_distance(a, b).map_err(|e| BackendError::Malformed(e.to_string()))
    }
}

/// Fixture-table scorer; unknown labels get neutral low scores.
#[derive(Clone, Copy, Debug, Default)]
pub struct MockScorer;

impl AttributeScorer for MockScorer {
    fn score_attributes(&self, candidate: &Concept, base: &Concept) -> Result<Scored, BackendError> {
        let label = candidate.label();
        let (raw, category) = fixtures::SCORES
            .iter()
            .find(|f| f.label == label)
            .map(|f| (f.scores, f.category))
            .unwrap_or((fixtures::DEFAULT_SCORES, Category::ConcreteObject));
        let scores = AttributeScores::new(raw.0, raw.1, raw.2, raw.3).expect("fixture scores in range");
        let interpretation = fixtures::INTERPRETATIONS
            .iter()
            .find(|(c, b, _)| *c == label && *b == base.label())
            .map(|(_, _, text)| text.to_string())
            .unwrap_or_else(|| format!("a {label} is a familiar object that can stand in for {}", base.label()));
        Ok(Scored {
            scores,
            interpretation,
            category,
            clamped: false,
        })
    }
}

fn table_expand(
    table: ExpansionTable,
    source: ConceptSource,
    input: &Concept,
    known: &BTreeSet<String>,
) -> Expansion {
    let mut seeds: Vec<&str> = alloc::vec![input.label()];
    seeds.extend(known.iter().map(String::as_str));
    let mut seen = known.clone();
    let mut concepts = Vec::new();
    for seed in seeds {
        let Some((_, rows)) = table.iter().find(|(k, _)| *k == seed) else {
            continue;
        };
        for (label, gloss) in rows.iter() {
            if seen.insert(label.to_string()) {
                concepts.push(Concept::new(label, gloss, source).expect("fixture labels are non-blank"));
            }
        }
    }
    Expansion {
        concepts,
        warnings: Vec::new(),
    }
}

/// Knowledge-base neighbours of the input and of every known concept.
#[derive(Clone, Copy, Debug, Default)]
pub struct MockKnowledgeExpander;

impl ConceptExpander for MockKnowledgeExpander {
    fn expand_concepts(&self, input: &Concept, known: &BTreeSet<String>) -> Result<Expansion, BackendError> {
        Ok(table_expand(fixtures::KB_EXPANSIONS, ConceptSource::KnowledgeBase, input, known))
    }
}

/// Language-model associations of the input and of every known concept.
#[derive(Clone, Copy, Debug, Default)]
pub struct MockLanguageExpander;

impl ConceptExpander for MockLanguageExpander {
    fn expand_concepts(&self, input: &Concept, known: &BTreeSet<String>) -> Result<Expansion, BackendError> {
        Ok(table_expand(fixtures::LLM_EXPANSIONS, ConceptSource::LanguageModel, input, known))
    }
}

pub fn mock_expander() -> MergedExpander<MockKnowledgeExpander, MockLanguageExpander> {
    MergedExpander {
        primary: MockKnowledgeExpander,
        secondary: MockLanguageExpander,
    }
}

/// Fixture relations; unknown concepts have none.
#[derive(Clone, Copy, Debug, Default)]
pub struct MockKnowledgeBase;

impl RelationProvider for MockKnowledgeBase {
    fn relations(&self, center: &Concept) -> Result<Vec<SemanticRelation>, BackendError> {
        Ok(fixtures::RELATIONS
            .iter()
            .filter(|(s, ..)| *s == center.label())
            .map(|&(s, rel, o, w)| SemanticRelation::new(s, rel, o, KnowledgeSource::ConceptNet, w))
            .collect())
    }
}

const PALETTE: [[u8; 3]; 6] = [
    [214, 69, 65],
    [52, 120, 198],
    [46, 160, 90],
    [240, 160, 40],
    [140, 80, 180],
    [30, 150, 160],
];

/// Outline: boundary of the binarized silhouette. Filled: silhouette with
/// holes flood-filled. Color: the filled silhouette painted with a palette
/// colour chosen by image hash.
#[derive(Clone, Debug)]
pub struct MockRestyler {
    pub threshold: u8,
}

impl Default for MockRestyler {
    fn default() -> Self {
        Self { threshold: DEFAULT_THRESHOLD }
    }
}

impl Restyler for MockRestyler {
    fn restyle(&self, img: &Raster, variant: StyleVariant) -> Result<Raster, BackendError> {
        let mask = binarize(img, self.threshold);
        Ok(match variant {
            StyleVariant::Outline => mask_to_gray(&boundary(&mask)),
            StyleVariant::Filled => mask_to_gray(&fill_holes(&mask)),
            StyleVariant::Color => {
                let digest = raster_digest(b"restyle-color", Some(img), &[]);
                let [r, g, b] = PALETTE[digest[0] as usize % PALETTE.len()];
                let filled = fill_holes(&mask);
                let mut data = Vec::with_capacity(filled.len() * 4);
                for i in 0..filled.len() {
                    if filled.get_index(i) {
                        data.extend_from_slice(&[r, g, b, 255]);
                    } else {
                        data.extend_from_slice(&[255, 255, 255, 255]);
                    }
                }
                Raster::new(img.width(), img.height(), Channels::Rgba8, data).expect("same dimensions")
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::BackendSet;
    use crate::imaging::filter::distinct_levels;
    use alloc::vec;

    fn square(side: u32, lo: u32, hi: u32) -> Raster {
        let data = (0..side * side)
            .map(|i| {
                let (x, y) = (i % side, i / side);
                if (lo..hi).contains(&x) && (lo..hi).contains(&y) { 0 } else { 255 }
            })
            .collect();
        Raster::gray(side, side, data).unwrap()
    }

    #[test]
    fn generator_is_deterministic_and_prompt_sensitive() {
        let g = MockGenerator::default();
        let a = g.generate("a clean icon-style illustration of seed", None).unwrap();
        let b = g.generate("a clean icon-style illustration of seed", None).unwrap();
        let c = g.generate("a clean icon-style illustration of dove", None).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let conditioned = g.generate("x", Some(&a)).unwrap();
        assert_eq!(conditioned, g.generate("x", Some(&a)).unwrap());
        assert_ne!(conditioned, g.generate("x", None).unwrap());
        assert_eq!(a.dimensions(), (MOCK_IMAGE_SIDE, MOCK_IMAGE_SIDE));
    }

    #[test]
    fn segmenter_splits_blobs() {
        let mut data = vec![255u8; 100];
        for (x, y) in [(1, 1), (2, 1), (1, 2), (2, 2), (7, 7), (8, 7)] {
            data[y * 10 + x] = 0;
        }
        let img = Raster::gray(10, 10, data).unwrap();
        let masks = MockSegmenter::default().segment(&img).unwrap();
        let areas: Vec<_> = masks.iter().map(BinaryMask::area).collect();
        assert_eq!(areas, vec![4, 2]);
        assert!(masks.iter().all(|m| m.dimensions() == (10, 10)));
        let blank = Raster::filled(10, 10, Channels::Gray8, &[255]).unwrap();
        assert!(MockSegmenter::default().segment(&blank).unwrap().is_empty());
    }

    #[test]
    fn reference_features_of_mid_gray() {
        let img = Raster::filled(64, 48, Channels::Gray8, &[128]).unwrap();
        let f = ReferenceFeatures.extract_features(&img).unwrap();
        assert_eq!(f.len(), 1024);
        assert!(f.values().iter().all(|v| (v - 0.502).abs() < 0.002));
    }

    #[test]
    fn scorer_fixtures_and_default() {
        let hope = Concept::user("hope").unwrap();
        let seed = Concept::user("seed").unwrap();
        let s = MockScorer.score_attributes(&seed, &hope).unwrap();
        assert!(s.interpretation.contains("promise of growth"));
        let odd = Concept::user("zeppelin").unwrap();
        let s = MockScorer.score_attributes(&odd, &hope).unwrap();
        assert_eq!(s.scores, AttributeScores::new(3, 4, 4, 5).unwrap());
        assert_eq!(s.category, Category::ConcreteObject);
    }

    #[test]
    fn expander_fixture_and_dedup() {
        let hope = Concept::user("hope").unwrap();
        let e = mock_expander().expand_concepts(&hope, &BTreeSet::new()).unwrap();
        let labels: Vec<_> = e.concepts.iter().map(|c| c.label()).collect();
        for want in ["phoenix", "sunrise", "lighthouse", "seed"] {
            assert!(labels.contains(&want), "{want} missing");
        }
        let all: BTreeSet<String> = labels.iter().map(|s| s.to_string()).collect();
        let mut known = all.clone();
        known.insert("hope".into());
        let again = mock_expander().expand_concepts(&hope, &BTreeSet::new()).unwrap();
        assert_eq!(again.concepts.len(), e.concepts.len());
        // Everything the input alone yields is filtered once known.
        let rest = table_expand(fixtures::KB_EXPANSIONS, ConceptSource::KnowledgeBase, &hope, &known);
        assert!(rest.concepts.iter().all(|c| !all.contains(c.label())));
    }

    #[test]
    fn simplifier_resumes_frame_for_frame() {
        let img = MockGenerator::default().generate("resume", None).unwrap();
        let s = ReferenceSimplifier::default();
        let two = s.simplify(&img, 0, 2).unwrap();
        let first = s.simplify(&img, 0, 1).unwrap();
        let second = s.simplify(&first[0], 1, 1).unwrap();
        assert_eq!(two[0], first[0]);
        assert_eq!(two[1], second[0]);
        assert!(two.iter().all(|f| f.dimensions() == img.dimensions()));
    }

    #[test]
    fn simplifier_level_count_never_grows() {
        let img = MockGenerator::default().generate("levels", None).unwrap();
        let frames = ReferenceSimplifier::default().simplify(&img, 0, 12).unwrap();
        let mut prev = distinct_levels(&img).len();
        for f in &frames {
            let n = distinct_levels(f).len();
            assert!(n <= prev);
            prev = n;
        }
    }

    #[test]
    fn simplifier_keeps_uniform_images_uniform() {
        let flat = Raster::filled(16, 16, Channels::Gray8, &[146]).unwrap();
        for f in ReferenceSimplifier::default().simplify(&flat, 0, 5).unwrap() {
            assert_eq!(f, flat);
        }
    }

    #[test]
    fn restyle_square() {
        let sq = square(12, 3, 9);
        let r = MockRestyler::default();
        let outline = r.restyle(&sq, StyleVariant::Outline).unwrap();
        let ring = binarize(&outline, 128);
        assert_eq!(ring.area(), 20);
        assert!(!ring.get(5, 5));
        let filled = r.restyle(&outline, StyleVariant::Filled).unwrap();
        assert_eq!(filled, sq);
        let color = r.restyle(&sq, StyleVariant::Color).unwrap();
        assert_eq!(color, r.restyle(&sq, StyleVariant::Color).unwrap());
        assert_eq!(color.channels(), Channels::Rgba8);
    }

    #[test]
    fn relations_for_known_and_unknown_centers() {
        let kb = MockKnowledgeBase;
        assert!(!kb.relations(&Concept::user("hamburger").unwrap()).unwrap().is_empty());
        assert!(kb.relations(&Concept::user("zeppelin").unwrap()).unwrap().is_empty());
    }

    #[test]
    fn mock_set_builds() {
        let set = BackendSet::mock();
        let img = set.generator.generate("p", None).unwrap();
        assert_eq!(set.metric.distance(&img, &img).unwrap(), 0.0);
    }
}
