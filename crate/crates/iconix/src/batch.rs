//! Headless end-to-end run with default selections.
//!
//! Output tree:
//!
//! ```text
//! candidate_table.json   scaffold.json   prompt_chain.json
//! exemplars/{view}.png
//! sequences/{view}.json  clustering/{view}.json  scatter/{view}.json  layers/{view}.json
//! grid/manifest.json     grid/{variant}.png
//! artifacts/<sha256>.<ext>
//! ```
//!
//! Every file is a function of the inputs, so mock runs with a fixed seed
//! are byte-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use iconix_core::backend::StyleVariant;
use iconix_core::grid::MAX_COLUMNS;
use iconix_core::scaffold::View;
use iconix_core::PipelineConfig;
use serde::Serialize;

use crate::env::{BackendConfig, EnvError};
use crate::stages::{self, ErrorClass, GridManifest, StageContext, StageError};
use crate::store::{to_json_bytes, write_atomic, ArtifactStore, StoreError};

#[derive(Clone, Debug, PartialEq)]
pub struct BatchSpec {
    pub concept: String,
    pub out_dir: PathBuf,
    /// Ignore `ICONIX_*` endpoints and run every backend offline.
    pub mock: bool,
    pub columns: Option<usize>,
    pub styles: BTreeSet<StyleVariant>,
    pub seed: Option<u64>,
    pub config_file: Option<PathBuf>,
}

impl BatchSpec {
    pub fn new(concept: &str, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            concept: concept.to_string(),
            out_dir: out_dir.into(),
            mock: false,
            columns: None,
            styles: StyleVariant::ALL.into_iter().collect(),
            seed: None,
            config_file: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BatchError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl BatchError {
    /// 2 config, 3 backend, 4 empty pool, 5 I/O, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            BatchError::Config(_) | BatchError::Env(_) => 2,
            BatchError::Store(_) => 5,
            BatchError::Stage(e) => match e.class() {
                ErrorClass::Config => 2,
                ErrorClass::Backend => 3,
                ErrorClass::EmptyPool => 4,
                ErrorClass::Io => 5,
                ErrorClass::Module => 1,
            },
        }
    }
}

/// Defaults, then the config file, then `--seed` / `--columns`.
pub fn resolve_config(spec: &BatchSpec) -> Result<PipelineConfig, BatchError> {
    let mut config = match &spec.config_file {
        None => PipelineConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| BatchError::Config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| BatchError::Config(format!("{}: {e}", path.display())))?
        }
    };
    if let Some(seed) = spec.seed {
        config.seed = seed;
    }
    if let Some(columns) = spec.columns {
        if !(1..=MAX_COLUMNS).contains(&columns) {
            return Err(BatchError::Config(format!("columns must lie in 1..={MAX_COLUMNS}, got {columns}")));
        }
        config.columns = columns as u32;
    }
    config.validate().map_err(|e| BatchError::Config(e.to_string()))?;
    Ok(config)
}

fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> Result<(), StoreError> {
    write_atomic(&dir.join(name), &to_json_bytes(value))
}

fn copy_artifact(store: &ArtifactStore, reference: &str, to: &Path) -> Result<(), StoreError> {
    write_atomic(to, &store.get(reference)?)
}

/// Runs the pipeline and writes the output tree; returns the grid
/// manifest.
pub fn run_batch(spec: &BatchSpec, backend_config: &BackendConfig) -> Result<GridManifest, BatchError> {
    let config = resolve_config(spec)?;
    let backend_config = if spec.mock {
        backend_config.all_mock()
    } else {
        backend_config.clone()
    };
    let backends = backend_config.build();
    let out = spec.out_dir.as_path();
    fs::create_dir_all(out).map_err(|e| StoreError::io(out, e))?;
    let store = ArtifactStore::new(out);
    let ctx = StageContext {
        backends: &backends,
        config: &config,
        store: &store,
    };

    log::info!("ideating `{}`", spec.concept);
    let ideation = stages::ideate(&ctx, &spec.concept)?;
    write_json(out, "candidate_table.json", &ideation)?;

    let scaffold = stages::scaffold(&ctx, &ideation, None)?;
    log::info!("top candidate: `{}`", scaffold.candidate);
    write_json(out, "scaffold.json", &scaffold)?;

    let exemplars = stages::exemplars(&ctx, &scaffold, None, &BTreeMap::new())?;
    write_json(out, "prompt_chain.json", &exemplars)?;
    for e in &exemplars.images {
        copy_artifact(&store, &e.image_ref, &out.join("exemplars").join(format!("{}.png", e.view.as_str())))?;
    }

    let views = stages::simplify(&ctx, &exemplars, &View::CHAIN)?;
    for (view, snap) in &views {
        log::info!(
            "{}: {} frames, {:?}",
            view.as_str(),
            snap.sequence.frames.len(),
            snap.sequence.terminated_by
        );
        let name = format!("{}.json", view.as_str());
        write_json(&out.join("sequences"), &name, &snap.sequence)?;
        write_json(&out.join("clustering"), &name, &snap.clustering)?;
        write_json(&out.join("scatter"), &name, &snap.scatter)?;
    }

    let grid = stages::grid(&ctx, &scaffold.candidate, &views, None, None)?;
    let grid = stages::restyle(&ctx, &grid, &spec.styles)?;
    for (view, layers) in &grid.layers {
        write_json(&out.join("layers"), &format!("{}.json", view.as_str()), layers)?;
    }
    write_json(&out.join("grid"), "manifest.json", &grid.manifest)?;
    for sheet in &grid.manifest.sheets {
        copy_artifact(
            &store,
            &sheet.png_ref,
            &out.join("grid").join(format!("{}.png", sheet.variant.as_str())),
        )?;
    }
    Ok(grid.manifest)
}
