use serde::{Deserialize, Serialize};

/// Tunables in effect for one pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Ideation rounds before giving up on stabilization.
    pub max_iterations: u32,
    /// Steps between perceptual-distance checkpoints.
    pub interval: u32,
    /// Plateau tolerance on checkpoint distances.
    pub epsilon: f64,
    /// Consecutive sub-tolerance checkpoints needed for a plateau.
    pub stable_required: u32,
    pub max_steps: u32,
    /// Cluster count for representative selection.
    pub k: u32,
    /// Grid columns (complexity levels).
    pub columns: u32,
    /// Layer opacity for mask compositing.
    pub alpha: f64,
    pub seed: u64,
    /// Luminance threshold for the single-component check.
    pub threshold: u8,
    /// Relations per view picked automatically when none are selected.
    pub auto_relations: u32,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5,
            interval: 5,
            epsilon: 0.02,
            stable_required: 2,
            max_steps: 200,
            k: 9,
            columns: 3,
            alpha: 0.5,
            seed: 42,
            threshold: 128,
            auto_relations: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid config field `{field}`: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |field, reason| Err(ConfigError { field, reason });
        if self.max_iterations == 0 {
            return fail("max_iterations", "must be at least 1");
        }
        if self.interval == 0 {
            return fail("interval", "must be at least 1");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return fail("epsilon", "must be a positive finite number");
        }
        if self.stable_required == 0 {
            return fail("stable_required", "must be at least 1");
        }
        if self.max_steps < self.interval {
            return fail("max_steps", "must be at least the checkpoint interval");
        }
        if self.k == 0 {
            return fail("k", "must be at least 1");
        }
        if !(1..=9).contains(&self.columns) {
            return fail("columns", "must lie in 1..=9");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail("alpha", "must lie in [0, 1]");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = PipelineConfig::default();
        c.validate().unwrap();
        assert_eq!((c.k, c.alpha, c.max_iterations), (9, 0.5, 5));
    }

    #[test]
    fn rejects_out_of_range() {
        let bad = PipelineConfig { epsilon: -1.0, ..Default::default() };
        assert_eq!(bad.validate().unwrap_err().field, "epsilon");
        let bad = PipelineConfig { columns: 12, ..Default::default() };
        assert_eq!(bad.validate().unwrap_err().field, "columns");
        let bad = PipelineConfig { max_steps: 3, ..Default::default() };
        assert_eq!(bad.validate().unwrap_err().field, "max_steps");
    }

    #[test]
    fn partial_json_merges_onto_defaults() {
        let c: PipelineConfig = serde_json::from_str(r#"{"k": 4}"#).unwrap();
        assert_eq!(c, PipelineConfig { k: 4, ..Default::default() });
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"kk": 4}"#).is_err());
    }
}
