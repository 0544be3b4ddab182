//! Backend selection from `ICONIX_*` environment variables.
//!
//! For each kind, `ICONIX_{KIND}_URL` names a model server and
//! `ICONIX_{KIND}_MODE` is `remote` or `mock`. Without a mode the kind is
//! remote when a URL is set and mock otherwise. `ICONIX_TIMEOUT_SECS`
//! (default 30) applies to every remote call and `ICONIX_RELATIONS_URL`
//! points relation lookups at a ConceptNet-style `/query` API.

use std::collections::BTreeMap;

use iconix_core::backend::mock::{
    mock_expander, MockGenerator, MockKnowledgeBase, MockRestyler, MockScorer, MockSegmenter, ReferenceFeatures,
    ReferenceMetric, ReferenceSimplifier,
};
use iconix_core::backend::{BackendEndpoint, BackendKind, BackendMode, BackendSet};

use crate::remote::{ConceptNetClient, RemoteClient};

pub const DEFAULT_TIMEOUT_SECS: u64 = 30;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvError {
    #[error("{var}: expected `remote` or `mock`, got `{value}`")]
    BadMode { var: String, value: String },
    #[error("{var}: expected a positive integer, got `{value}`")]
    BadTimeout { var: String, value: String },
    #[error("{kind} is in remote mode but ICONIX_{kind}_URL is not set")]
    MissingUrl { kind: &'static str },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackendConfig {
    pub endpoints: BTreeMap<BackendKind, BackendEndpoint>,
    pub relations_url: Option<String>,
    pub timeout_secs: u64,
}

impl Default for BackendConfig {
    /// Every kind mocked.
    fn default() -> Self {
        Self {
            endpoints: BackendKind::ALL.into_iter().map(|k| (k, BackendEndpoint::mock(k))).collect(),
            relations_url: None,
            timeout_secs: DEFAULT_TIMEOUT_SECS,
        }
    }
}

impl BackendConfig {
    pub fn from_env() -> Result<Self, EnvError> {
        Self::from_vars(|name| std::env::var(name).ok())
    }

    /// Reads variables through `var`, so tests need not touch the process
    /// environment.
    pub fn from_vars(var: impl Fn(&str) -> Option<String>) -> Result<Self, EnvError> {
        let get = |name: &str| var(name).map(|v| v.trim().to_string()).filter(|v| !v.is_empty());
        let timeout_secs = match get("ICONIX_TIMEOUT_SECS") {
            None => DEFAULT_TIMEOUT_SECS,
            Some(v) => match v.parse::<u64>() {
                Ok(n) if n > 0 => n,
                _ => {
                    return Err(EnvError::BadTimeout {
                        var: "ICONIX_TIMEOUT_SECS".into(),
                        value: v,
                    })
                }
            },
        };
        let mut endpoints = BTreeMap::new();
        for kind in BackendKind::ALL {
            let url = get(&format!("ICONIX_{}_URL", kind.env_name()));
            let mode_var = format!("ICONIX_{}_MODE", kind.env_name());
            let mode = match get(&mode_var).map(|m| m.to_lowercase()) {
                None if url.is_some() => BackendMode::Remote,
                None => BackendMode::Mock,
                Some(m) if m == "remote" => BackendMode::Remote,
                Some(m) if m == "mock" => BackendMode::Mock,
                Some(m) => return Err(EnvError::BadMode { var: mode_var, value: m }),
            };
            let endpoint = BackendEndpoint {
                kind,
                url: url.unwrap_or_default(),
                timeout_secs,
                mode,
            };
            if !endpoint.is_valid() {
                return Err(EnvError::MissingUrl { kind: kind.env_name() });
            }
            endpoints.insert(kind, endpoint);
        }
        Ok(Self {
            endpoints,
            relations_url: get("ICONIX_RELATIONS_URL"),
            timeout_secs,
        })
    }

    /// Same settings with every kind switched to mock and no relation URL.
    pub fn all_mock(&self) -> Self {
        Self {
            timeout_secs: self.timeout_secs,
            ..Self::default()
        }
    }

    pub fn is_offline(&self) -> bool {
        self.relations_url.is_none() && self.endpoints.values().all(|e| e.mode == BackendMode::Mock)
    }

    fn remote(&self, kind: BackendKind) -> Option<RemoteClient> {
        self.endpoints
            .get(&kind)
            .filter(|e| e.mode == BackendMode::Remote)
            .map(|e| RemoteClient::new(e.clone()))
    }

    /// Instantiates one backend per role.
    pub fn build(&self) -> BackendSet {
        let mut set = BackendSet::mock();
        set.generator = match self.remote(BackendKind::Generate) {
            Some(c) => Box::new(c),
            None => Box::new(MockGenerator::default()),
        };
        set.simplifier = match self.remote(BackendKind::Simplify) {
            Some(c) => Box::new(c),
            None => Box::new(ReferenceSimplifier::default()),
        };
        set.segmenter = match self.remote(BackendKind::Segment) {
            Some(c) => Box::new(c),
            None => Box::new(MockSegmenter::default()),
        };
        set.scorer = match self.remote(BackendKind::Score) {
            Some(c) => Box::new(c),
            None => Box::new(MockScorer),
        };
        set.expander = match self.remote(BackendKind::Expand) {
            Some(c) => Box::new(c),
            None => Box::new(mock_expander()),
        };
        set.features = match self.remote(BackendKind::Features) {
            Some(c) => Box::new(c),
            None => Box::new(ReferenceFeatures),
        };
        set.metric = match self.remote(BackendKind::Perceptual) {
            Some(c) => Box::new(c),
            None => Box::new(ReferenceMetric),
        };
        set.restyler = match self.remote(BackendKind::Restyle) {
            Some(c) => Box::new(c),
            None => Box::new(MockRestyler::default()),
        };
        set.relations = match &self.relations_url {
            Some(url) => Box::new(ConceptNetClient::new(url, self.timeout_secs)),
            None => Box::new(MockKnowledgeBase),
        };
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(pairs: &[(&str, &str)]) -> impl Fn(&str) -> Option<String> {
        let map: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        move |k| map.get(k).cloned()
    }

    #[test]
    fn empty_environment_is_all_mock() {
        let c = BackendConfig::from_vars(vars(&[])).unwrap();
        assert_eq!(c, BackendConfig::default());
        assert!(c.is_offline());
    }

    #[test]
    fn url_implies_remote_unless_mode_says_mock() {
        let c = BackendConfig::from_vars(vars(&[
            ("ICONIX_GENERATE_URL", "http://gen:9000"),
            ("ICONIX_SEGMENT_URL", "http://seg:9000"),
            ("ICONIX_SEGMENT_MODE", "MOCK"),
            ("ICONIX_TIMEOUT_SECS", "7"),
        ]))
        .unwrap();
        let generate = &c.endpoints[&BackendKind::Generate];
        assert_eq!((generate.mode, generate.timeout_secs), (BackendMode::Remote, 7));
        assert_eq!(c.endpoints[&BackendKind::Segment].mode, BackendMode::Mock);
        assert!(!c.is_offline());
        assert!(c.all_mock().is_offline());
    }

    #[test]
    fn invalid_settings_are_rejected() {
        let e = BackendConfig::from_vars(vars(&[("ICONIX_SCORE_MODE", "remote")])).unwrap_err();
        assert_eq!(e, EnvError::MissingUrl { kind: "SCORE" });
        assert!(BackendConfig::from_vars(vars(&[("ICONIX_SCORE_MODE", "cloud")])).is_err());
        assert!(BackendConfig::from_vars(vars(&[("ICONIX_TIMEOUT_SECS", "0")])).is_err());
    }
}
