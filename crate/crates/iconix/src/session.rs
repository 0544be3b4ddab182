//! Persistent pipeline sessions.
//!
//! A session is a directory `<root>/<id>/` holding `state.json` and an
//! `artifacts/` store. `state.json` is replaced atomically after a stage
//! succeeds, so a process killed mid-stage leaves the last completed stage
//! on disk. Operations on one session are serialized by a per-session lock.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use iconix_core::backend::{BackendEndpoint, BackendSet, StyleVariant};
use iconix_core::ideation::IdeationState;
use iconix_core::scaffold::{Selections, View};
use iconix_core::PipelineConfig;
use serde::{Deserialize, Serialize};

use crate::env::BackendConfig;
use crate::stages::{self, ExemplarSnapshot, GridSnapshot, ScaffoldSnapshot, StageContext, StageError, ViewSnapshot};
use crate::store::{to_json_bytes, write_atomic, ArtifactStore, StoreError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Created,
    Ideated,
    Scaffolded,
    ExemplarsReady,
    Simplified,
    GridReady,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Created,
        Stage::Ideated,
        Stage::Scaffolded,
        Stage::ExemplarsReady,
        Stage::Simplified,
        Stage::GridReady,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Created => "created",
            Stage::Ideated => "ideated",
            Stage::Scaffolded => "scaffolded",
            Stage::ExemplarsReady => "exemplars_ready",
            Stage::Simplified => "simplified",
            Stage::GridReady => "grid_ready",
        }
    }

    fn next(self) -> Option<Stage> {
        Self::ALL.get(self as usize + 1).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub stage: Stage,
    pub config: PipelineConfig,
    pub backends: Vec<BackendEndpoint>,
    pub concept: Option<String>,
    pub ideation: Option<IdeationState>,
    pub scaffold: Option<ScaffoldSnapshot>,
    pub exemplars: Option<ExemplarSnapshot>,
    pub simplification: Option<BTreeMap<View, ViewSnapshot>>,
    pub grid: Option<GridSnapshot>,
}

impl SessionState {
    /// Drops every snapshot produced after `stage` and sets the stage.
    pub fn truncate_to(&mut self, stage: Stage) {
        if stage < Stage::GridReady {
            self.grid = None;
        }
        if stage < Stage::Simplified {
            self.simplification = None;
        }
        if stage < Stage::ExemplarsReady {
            self.exemplars = None;
        }
        if stage < Stage::Scaffolded {
            self.scaffold = None;
        }
        if stage < Stage::Ideated {
            self.ideation = None;
            self.concept = None;
        }
        self.stage = stage;
    }
}

/// Body of a stage request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum StageRequest {
    Ideate {
        concept: String,
    },
    Scaffold {
        #[serde(default)]
        candidate_label: Option<String>,
    },
    Exemplars {
        #[serde(default)]
        prompt_edits: BTreeMap<View, String>,
        #[serde(default)]
        selections: Option<Selections>,
    },
    Simplify {
        /// Views to (re)simplify; others keep their current sequences.
        #[serde(default)]
        exemplar_views: Option<Vec<View>>,
    },
    Grid {
        #[serde(default)]
        picks: Option<BTreeMap<View, Vec<u32>>>,
        #[serde(default)]
        columns: Option<usize>,
    },
    Restyle {
        variants: Vec<StyleVariant>,
    },
}

impl StageRequest {
    /// The stage this request produces.
    pub fn target(&self) -> Stage {
        match self {
            StageRequest::Ideate { .. } => Stage::Ideated,
            StageRequest::Scaffold { .. } => Stage::Scaffolded,
            StageRequest::Exemplars { .. } => Stage::ExemplarsReady,
            StageRequest::Simplify { .. } => Stage::Simplified,
            StageRequest::Grid { .. } | StageRequest::Restyle { .. } => Stage::GridReady,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("session `{0}` not found")]
    NotFound(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("cannot run {requested} from stage {}", current.as_str())]
    StageOrder { current: Stage, requested: &'static str },
    #[error("{} failed: {source}", stage.as_str())]
    Stage { stage: Stage, source: StageError },
    #[error("session store is corrupt: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(StoreError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<StoreError> for SessionError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Corrupt { .. } | StoreError::Decode { .. } | StoreError::NotFound(_) => {
                SessionError::Corrupt(e.to_string())
            }
            other => SessionError::Io(other),
        }
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.bytes().all(|b| b.is_ascii_hexdigit() || b == b'-')
}

/// Every artifact reference reachable from `value`, following references
/// into stored JSON artifacts.
fn collect_refs(store: &ArtifactStore, value: &serde_json::Value, out: &mut BTreeSet<String>) -> Result<(), StoreError> {
    match value {
        serde_json::Value::String(s) if s.starts_with("artifacts/") => {
            if out.insert(s.clone()) && s.ends_with(".json") {
                let nested: serde_json::Value = store.get_json(s)?;
                collect_refs(store, &nested, out)?;
            }
        }
        serde_json::Value::Array(items) => {
            for v in items {
                collect_refs(store, v, out)?;
            }
        }
        serde_json::Value::Object(map) => {
            for v in map.values() {
                collect_refs(store, v, out)?;
            }
        }
        _ => {}
    }
    Ok(())
}

pub struct SessionManager {
    root: PathBuf,
    backends: BackendSet,
    endpoints: Vec<BackendEndpoint>,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl SessionManager {
    pub fn new(root: impl Into<PathBuf>, backend_config: &BackendConfig) -> Self {
        Self::with_backends(root, backend_config.build(), backend_config.endpoints.values().cloned().collect())
    }

    pub fn with_backends(root: impl Into<PathBuf>, backends: BackendSet, endpoints: Vec<BackendEndpoint>) -> Self {
        Self {
            root: root.into(),
            backends,
            endpoints,
            locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    pub fn store(&self, id: &str) -> ArtifactStore {
        ArtifactStore::new(self.dir(id))
    }

    /// The mutual-exclusion token for one session.
    pub fn lock(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|p| p.into_inner());
        locks.entry(id.to_string()).or_default().clone()
    }

    /// Creates a session whose config is the defaults merged with
    /// `overrides` (a JSON object of config fields).
    pub fn create(&self, overrides: &serde_json::Value) -> Result<SessionState, SessionError> {
        let overrides = match overrides {
            serde_json::Value::Null => serde_json::Value::Object(Default::default()),
            other => other.clone(),
        };
        let config: PipelineConfig =
            serde_json::from_value(overrides).map_err(|e| SessionError::InvalidConfig(e.to_string()))?;
        config.validate().map_err(|e| SessionError::InvalidConfig(e.to_string()))?;
        let state = SessionState {
            id: uuid::Uuid::new_v4().simple().to_string(),
            stage: Stage::Created,
            config,
            backends: self.endpoints.clone(),
            concept: None,
            ideation: None,
            scaffold: None,
            exemplars: None,
            simplification: None,
            grid: None,
        };
        self.persist(&state)?;
        Ok(state)
    }

    pub fn persist(&self, state: &SessionState) -> Result<(), SessionError> {
        let path = self.dir(&state.id).join("state.json");
        write_atomic(&path, &to_json_bytes(state)).map_err(SessionError::Io)
    }

    /// Loads a session and checks that every artifact it refers to is
    /// present and matches its checksum.
    pub fn load(&self, id: &str) -> Result<SessionState, SessionError> {
        if !valid_id(id) {
            return Err(SessionError::NotFound(id.to_string()));
        }
        let path = self.dir(id).join("state.json");
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(SessionError::NotFound(id.to_string())),
            Err(e) => return Err(SessionError::Io(StoreError::io(&path, e))),
        };
        let value: serde_json::Value =
            serde_json::from_slice(&bytes).map_err(|e| SessionError::Corrupt(format!("state.json: {e}")))?;
        let store = self.store(id);
        let mut refs = BTreeSet::new();
        collect_refs(&store, &value, &mut refs)?;
        for r in &refs {
            store.verify(r)?;
        }
        let state: SessionState =
            serde_json::from_value(value).map_err(|e| SessionError::Corrupt(format!("state.json: {e}")))?;
        if state.id != id {
            return Err(SessionError::Corrupt(format!("state.json belongs to `{}`", state.id)));
        }
        Ok(state)
    }

    /// Every artifact reference reachable from the session's state.
    pub fn artifact_refs(&self, state: &SessionState) -> Result<BTreeSet<String>, SessionError> {
        let value = serde_json::to_value(state).expect("session state serializes");
        let mut refs = BTreeSet::new();
        collect_refs(&self.store(&state.id), &value, &mut refs)?;
        Ok(refs)
    }

    /// Runs one stage request. Callers must hold [`Self::lock`] for `id`;
    /// [`Self::advance`] does that.
    ///
    /// A request may target the next stage or redo any stage up to the
    /// current one; a redo drops every later snapshot. Restyling needs a
    /// finished grid. Nothing is written unless the stage succeeds.
    pub fn advance_locked(&self, id: &str, request: StageRequest) -> Result<SessionState, SessionError> {
        let current = self.load(id)?;
        let target = request.target();
        let requested = match &request {
            StageRequest::Restyle { .. } => "restyle",
            _ => target.as_str(),
        };
        let order_error = || SessionError::StageOrder {
            current: current.stage,
            requested,
        };
        let allowed = match &request {
            StageRequest::Restyle { .. } => current.stage == Stage::GridReady,
            _ => target <= current.stage || current.stage.next() == Some(target),
        };
        if !allowed {
            return Err(order_error());
        }

        let store = self.store(id);
        let ctx = StageContext {
            backends: &self.backends,
            config: &current.config,
            store: &store,
        };
        let fail = |source: StageError| SessionError::Stage {
            stage: current.stage,
            source,
        };
        let mut next = current.clone();
        match request {
            StageRequest::Ideate { concept } => {
                let ideation = stages::ideate(&ctx, &concept).map_err(fail)?;
                next.truncate_to(Stage::Created);
                next.concept = Some(concept.trim().to_string());
                next.ideation = Some(ideation);
            }
            StageRequest::Scaffold { candidate_label } => {
                let ideation = current.ideation.as_ref().ok_or_else(order_error)?;
                let snap = stages::scaffold(&ctx, ideation, candidate_label.as_deref()).map_err(fail)?;
                next.truncate_to(Stage::Ideated);
                next.scaffold = Some(snap);
            }
            StageRequest::Exemplars {
                prompt_edits,
                selections,
            } => {
                let scaffold = current.scaffold.as_ref().ok_or_else(order_error)?;
                let snap = stages::exemplars(&ctx, scaffold, selections, &prompt_edits).map_err(fail)?;
                next.truncate_to(Stage::Scaffolded);
                next.exemplars = Some(snap);
            }
            StageRequest::Simplify { exemplar_views } => {
                let exemplars = current.exemplars.as_ref().ok_or_else(order_error)?;
                let views = exemplar_views.unwrap_or_else(|| View::CHAIN.to_vec());
                let fresh = stages::simplify(&ctx, exemplars, &views).map_err(fail)?;
                let mut merged = current.simplification.clone().unwrap_or_default();
                merged.extend(fresh);
                next.truncate_to(Stage::ExemplarsReady);
                next.simplification = Some(merged);
            }
            StageRequest::Grid { picks, columns } => {
                let views = current.simplification.as_ref().ok_or_else(order_error)?;
                let concept = current.scaffold.as_ref().map(|s| s.candidate.as_str()).unwrap_or_default();
                let snap = stages::grid(&ctx, concept, views, columns, picks.as_ref()).map_err(fail)?;
                next.truncate_to(Stage::Simplified);
                next.grid = Some(snap);
            }
            StageRequest::Restyle { variants } => {
                let grid = current.grid.as_ref().ok_or_else(order_error)?;
                let variants: BTreeSet<StyleVariant> = variants.into_iter().collect();
                next.grid = Some(stages::restyle(&ctx, grid, &variants).map_err(fail)?);
            }
        }
        next.stage = target;
        self.persist(&next)?;
        Ok(next)
    }

    /// Serialized [`Self::advance_locked`], run off the async executor.
    pub async fn advance(self: &Arc<Self>, id: &str, request: StageRequest) -> Result<SessionState, SessionError> {
        let guard = self.lock(id).lock_owned().await;
        let this = Arc::clone(self);
        let id = id.to_string();
        tokio::task::spawn_blocking(move || {
            let _guard = guard;
            this.advance_locked(&id, request)
        })
        .await
        .unwrap_or_else(|e| Err(SessionError::Internal(format!("stage task failed: {e}"))))
    }
}
