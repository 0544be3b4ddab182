//! Progressive simplification with a plateau + single-component stop rule.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, PerceptualMetric, Simplifier};
use crate::config::PipelineConfig;
use crate::imaging::{binarize, connected_components, Connectivity, Raster, DEFAULT_THRESHOLD};

#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub step: u32,
    pub image: Raster,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub step: u32,
    /// Distance to the frame one interval earlier.
    pub distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    PlateauAndSingleComponent,
    MaxSteps,
    /// A backend failed part-way; the frames so far are kept.
    Incomplete,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub interval: u32,
    pub epsilon: f64,
    pub stable_required: u32,
    pub max_steps: u32,
    pub threshold: u8,
}

impl Default for StopRule {
    fn default() -> Self {
        Self::from(&PipelineConfig::default())
    }
}

impl From<&PipelineConfig> for StopRule {
    fn from(c: &PipelineConfig) -> Self {
        Self {
            interval: c.interval,
            epsilon: c.epsilon,
            stable_required: c.stable_required,
            max_steps: c.max_steps,
            threshold: c.threshold,
        }
    }
}

impl StopRule {
    fn validate(&self) -> Result<(), SimplificationError> {
        let bad = |msg: &str| Err(SimplificationError::InvalidRule(msg.into()));
        if self.interval == 0 {
            return bad("interval must be at least 1");
        }
        if self.max_steps < self.interval {
            return bad("max_steps must be at least the interval");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if self.stable_required == 0 {
            return bad("stable_required must be at least 1");
        }
        Ok(())
    }

    /// Plateau test first; the component count is only computed when the
    /// distances have settled.
    pub fn is_met(&self, checkpoints: &[Checkpoint], latest: &Raster) -> bool {
        let need = self.stable_required as usize;
        if need == 0 || checkpoints.len() < need {
            return false;
        }
        let plateau = checkpoints[checkpoints.len() - need..]
            .iter()
            .all(|c| c.distance < self.epsilon);
        plateau && single_component(latest, self.threshold)
    }
}

pub fn single_component(img: &Raster, threshold: u8) -> bool {
    connected_components(&binarize(img, threshold), Connectivity::Eight).count == 1
}

/// The stop rule at the default luminance threshold.
pub fn check_termination(checkpoints: &[Checkpoint], latest: &Raster, epsilon: f64, stable_required: u32) -> bool {
    let rule = StopRule {
        interval: 1,
        epsilon,
        stable_required,
        max_steps: 1,
        threshold: DEFAULT_THRESHOLD,
    };
    rule.is_met(checkpoints, latest)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplificationSequence {
    /// `frames[0]` is the source at step 0.
    pub frames: Vec<Frame>,
    pub checkpoints: Vec<Checkpoint>,
    pub terminated_by: Termination,
}

impl SimplificationSequence {
    pub fn source(&self) -> &Raster {
        &self.frames[0].image
    }

    pub fn last(&self) -> &Frame {
        self.frames.last().expect("sequence always holds the source")
    }

    pub fn last_step(&self) -> u32 {
        self.last().step
    }

    pub fn frame(&self, step: u32) -> Option<&Frame> {
        self.frames.binary_search_by_key(&step, |f| f.step).ok().map(|i| &self.frames[i])
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimplificationError {
    #[error("invalid stop rule: {0}")]
    InvalidRule(alloc::string::String),
    #[error("simplification stopped at step {}: {source}", partial.last_step())]
    Backend {
        source: BackendError,
        partial: Box<SimplificationSequence>,
    },
}

/// Advances `simplifier` one interval at a time from `source`, taking a
/// checkpoint distance at every multiple of the interval, until `rule` is
/// met or `rule.max_steps` frames have been produced.
pub fn run_simplification(
    source: &Raster,
    simplifier: &dyn Simplifier,
    metric: &dyn PerceptualMetric,
    rule: &StopRule,
) -> Result<SimplificationSequence, SimplificationError> {
    rule.validate()?;
    let mut seq = SimplificationSequence {
        frames: alloc::vec![Frame { step: 0, image: source.clone() }],
        checkpoints: Vec::new(),
        terminated_by: Termination::MaxSteps,
    };
    let fail = |mut seq: SimplificationSequence, source: BackendError| {
        seq.terminated_by = Termination::Incomplete;
        Err(SimplificationError::Backend {
            source,
            partial: Box::new(seq),
        })
    };

    let mut step = 0u32;
    while step < rule.max_steps {
        let count = rule.interval.min(rule.max_steps - step);
        let produced = match simplifier.simplify(&seq.last().image, step, count) {
            Ok(frames) => frames,
            Err(e) => return fail(seq, e),
        };
        if produced.len() != count as usize {
            let e = BackendError::Malformed(format!("asked for {count} frames, got {}", produced.len()));
            return fail(seq, e);
        }
        if let Some(bad) = produced.iter().find(|f| f.dimensions() != source.dimensions()) {
            let e = BackendError::Malformed(format!(
                "frame is {:?}, source is {:?}",
                bad.dimensions(),
                source.dimensions()
            ));
            return fail(seq, e);
        }
        for image in produced {
            step += 1;
            seq.frames.push(Frame { step, image });
        }

        if step % rule.interval == 0 {
            let prev = &seq.frames[(step - rule.interval) as usize].image;
            let distance = match metric.distance(&seq.last().image, prev) {
                Ok(d) => d,
                Err(e) => return fail(seq, e),
            };
            seq.checkpoints.push(Checkpoint { step, distance });
            if rule.is_met(&seq.checkpoints, &seq.last().image) {
                seq.terminated_by = Termination::PlateauAndSingleComponent;
                return Ok(seq);
            }
        }
    }
    Ok(seq)
}
