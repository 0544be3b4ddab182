//! Stage bodies shared by the batch runner and the session service.
//!
//! Each stage reads earlier snapshots, calls into `iconix_core`, writes its
//! images to the artifact store and returns a serializable snapshot that
//! refers to them.

use std::collections::{BTreeMap, BTreeSet};

use iconix_core::backend::{BackendError, BackendSet, StyleVariant};
use iconix_core::grid::{export_grid, restyle_grid, GridCell, GridError, IconGrid, Provenance, Rect, ROW_ORDER};
use iconix_core::ideation::{run_ideation, Concept, IdeationError, IdeationState};
use iconix_core::imaging::Rgba;
use iconix_core::layering::LayeredIcon;
use iconix_core::pipeline::{grid_from_icons, layer_frames, simplify_view, PipelineError};
use iconix_core::scaffold::{
    build_prompt_chain, build_scaffold, generate_exemplar_chain, PromptChain, Scaffold, ScaffoldError, Selections, View,
};
use iconix_core::selection::{ClusteringResult, Scatter};
use iconix_core::simplification::{Checkpoint, Termination};
use iconix_core::{Channels, ConfigError, PipelineConfig, Raster};
use serde::{Deserialize, Serialize};

use crate::store::{ArtifactStore, StoreError};

/// Coarse error classes; the batch runner maps them to exit codes and the
/// service to HTTP statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Backend,
    EmptyPool,
    Io,
    /// A module rejected its input (bad selections, picks, …).
    Module,
}

#[derive(Debug, thiserror::Error)]
pub enum StageError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("{context}: {source}")]
    Backend { context: String, source: BackendError },
    #[error(transparent)]
    Ideation(IdeationError),
    #[error(transparent)]
    Scaffold(#[from] ScaffoldError),
    #[error(transparent)]
    Pipeline(PipelineError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl StageError {
    pub fn class(&self) -> ErrorClass {
        match self {
            StageError::Config(_) | StageError::Invalid(_) => ErrorClass::Config,
            StageError::Backend { .. } => ErrorClass::Backend,
            StageError::Ideation(IdeationError::Backend { .. }) => ErrorClass::Backend,
            StageError::Ideation(IdeationError::EmptyPool { .. }) => ErrorClass::EmptyPool,
            StageError::Ideation(IdeationError::InvalidIterationCap) => ErrorClass::Config,
            StageError::Pipeline(e) if e.backend().is_some() => ErrorClass::Backend,
            StageError::Store(_) => ErrorClass::Io,
            StageError::Scaffold(_) | StageError::Pipeline(_) | StageError::Grid(_) => ErrorClass::Module,
        }
    }
}

impl From<IdeationError> for StageError {
    fn from(e: IdeationError) -> Self {
        StageError::Ideation(e)
    }
}

impl From<PipelineError> for StageError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Grid(g) => StageError::Grid(g),
            other => StageError::Pipeline(other),
        }
    }
}

/// What a stage needs from its surroundings.
pub struct StageContext<'a> {
    pub backends: &'a BackendSet,
    pub config: &'a PipelineConfig,
    pub store: &'a ArtifactStore,
}

pub fn ideate(ctx: &StageContext, concept: &str) -> Result<IdeationState, StageError> {
    ctx.config.validate()?;
    let input = Concept::user(concept).map_err(|_| StageError::Invalid("concept must not be blank".into()))?;
    Ok(run_ideation(
        input,
        &*ctx.backends.expander,
        &*ctx.backends.scorer,
        ctx.config.max_iterations,
    )?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldSnapshot {
    pub candidate: String,
    pub scaffold: Scaffold,
}

/// Builds the scaffold of `label`, or of the top-ranked candidate.
pub fn scaffold(
    ctx: &StageContext,
    ideation: &IdeationState,
    label: Option<&str>,
) -> Result<ScaffoldSnapshot, StageError> {
    let entry = match label {
        None => ideation.ranked.first(),
        Some(l) => {
            let l = iconix_core::ideation::normalize_label(l);
            ideation.ranked.iter().find(|e| e.label() == l)
        }
    }
    .ok_or_else(|| StageError::Invalid(format!("`{}` is not a ranked candidate", label.unwrap_or(""))))?;
    let center = entry.concept().clone();
    let relations = ctx.backends.relations.relations(&center).map_err(|source| StageError::Backend {
        context: format!("relations of `{}`", center.label()),
        source,
    })?;
    Ok(ScaffoldSnapshot {
        candidate: center.label().to_string(),
        scaffold: build_scaffold(center, relations)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExemplarRef {
    pub view: View,
    pub image_ref: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExemplarSnapshot {
    pub selections: Selections,
    pub chain: PromptChain,
    /// Chain order.
    pub images: Vec<ExemplarRef>,
}

impl ExemplarSnapshot {
    pub fn image_ref(&self, view: View) -> Option<&str> {
        self.images.iter().find(|e| e.view == view).map(|e| e.image_ref.as_str())
    }
}

/// Builds the prompt chain (default selections: the heaviest
/// `auto_relations` relations per view), applies prompt edits and
/// generates the three exemplars.
pub fn exemplars(
    ctx: &StageContext,
    scaffold: &ScaffoldSnapshot,
    selections: Option<Selections>,
    prompt_edits: &BTreeMap<View, String>,
) -> Result<ExemplarSnapshot, StageError> {
    let selections = selections
        .unwrap_or_else(|| Selections::top_by_weight(&scaffold.scaffold, ctx.config.auto_relations as usize));
    let mut chain = build_prompt_chain(&scaffold.scaffold, &selections)?;
    for (view, prompt) in prompt_edits {
        chain.edit_prompt(*view, prompt);
    }
    let run = generate_exemplar_chain(&chain, &*ctx.backends.generator);
    if let Some((view, source)) = run.failed {
        return Err(StageError::Backend {
            context: format!("{} exemplar", view.as_str()),
            source,
        });
    }
    let images = run
        .images
        .iter()
        .map(|(view, img)| {
            Ok(ExemplarRef {
                view: *view,
                image_ref: ctx.store.put_png(img)?,
            })
        })
        .collect::<Result<_, StoreError>>()?;
    Ok(ExemplarSnapshot {
        selections,
        chain,
        images,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameRef {
    pub step: u32,
    pub image_ref: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceManifest {
    pub view: View,
    pub source_ref: String,
    pub frames: Vec<FrameRef>,
    pub checkpoints: Vec<Checkpoint>,
    pub terminated_by: Termination,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewSnapshot {
    pub sequence: SequenceManifest,
    pub clustering: ClusteringResult,
    pub scatter: Scatter,
}

impl ViewSnapshot {
    /// (step, frame ref) of each representative, in step order.
    pub fn representatives(&self) -> Vec<(u32, &str)> {
        self.clustering
            .representatives
            .iter()
            .map(|&i| {
                let f = &self.sequence.frames[i];
                (f.step, f.image_ref.as_str())
            })
            .collect()
    }
}

/// Simplifies and clusters each exemplar in `views`.
pub fn simplify(
    ctx: &StageContext,
    exemplars: &ExemplarSnapshot,
    views: &[View],
) -> Result<BTreeMap<View, ViewSnapshot>, StageError> {
    ctx.config.validate()?;
    let mut out = BTreeMap::new();
    for &view in views {
        let source_ref = exemplars
            .image_ref(view)
            .ok_or_else(|| StageError::Invalid(format!("no exemplar for the {} view", view.as_str())))?;
        let exemplar = ctx.store.get_png(source_ref)?;
        let run = simplify_view(view, &exemplar, ctx.backends, ctx.config)?;
        let frames = run
            .sequence
            .frames
            .iter()
            .map(|f| {
                Ok(FrameRef {
                    step: f.step,
                    image_ref: ctx.store.put_png(&f.image)?,
                })
            })
            .collect::<Result<_, StoreError>>()?;
        out.insert(
            view,
            ViewSnapshot {
                sequence: SequenceManifest {
                    view,
                    source_ref: source_ref.to_string(),
                    frames,
                    checkpoints: run.sequence.checkpoints,
                    terminated_by: run.sequence.terminated_by,
                },
                clustering: run.clustering,
                scatter: run.scatter,
            },
        );
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerRef {
    pub mask_ref: String,
    pub area: usize,
    pub order_index: usize,
    pub fill: Rgba,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerManifest {
    pub view: View,
    pub step: u32,
    pub frame_ref: String,
    pub alpha: f64,
    pub layers: Vec<LayerRef>,
    pub composite_ref: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellProvenance {
    pub view: View,
    pub step: u32,
    pub layers_ref: String,
}

/// One grid position with every variant produced for it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IconManifest {
    pub row: usize,
    pub col: usize,
    pub semantic_level: u8,
    pub complexity_level: usize,
    pub provenance: CellProvenance,
    pub composite_ref: String,
    pub variants: BTreeMap<StyleVariant, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub failed: BTreeMap<StyleVariant, String>,
}

/// One tile of one sprite sheet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellManifest {
    pub row: usize,
    pub col: usize,
    pub variant: StyleVariant,
    pub png_ref: String,
    /// Tile position within the variant's sheet.
    pub rect: Rect,
    /// Layout of the cell before tiling.
    pub channels: Channels,
    pub provenance: CellProvenance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheetManifest {
    pub variant: StyleVariant,
    pub png_ref: String,
    pub width: u32,
    pub height: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowManifest {
    pub row: usize,
    pub view: View,
    pub semantic_level: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridManifest {
    pub concept: String,
    pub rows: usize,
    pub columns: usize,
    /// Top to bottom.
    pub row_views: Vec<RowManifest>,
    /// Variants present on every cell, each with a sprite sheet.
    pub variants: Vec<StyleVariant>,
    /// Sheet tiles, grouped by variant, row-major within a variant.
    pub cells: Vec<CellManifest>,
    pub sheets: Vec<SheetManifest>,
    /// Row-major grid positions.
    pub icons: Vec<IconManifest>,
}

impl GridManifest {
    pub fn icon(&self, row: usize, col: usize) -> &IconManifest {
        &self.icons[row * self.columns + col]
    }

    pub fn sheet(&self, variant: StyleVariant) -> Option<&SheetManifest> {
        self.sheets.iter().find(|s| s.variant == variant)
    }

    pub fn cells_of(&self, variant: StyleVariant) -> impl Iterator<Item = &CellManifest> + '_ {
        self.cells.iter().filter(move |c| c.variant == variant)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSnapshot {
    pub manifest: GridManifest,
    /// Layered representatives per view, in step order.
    pub layers: BTreeMap<View, Vec<LayerManifest>>,
}

fn store_icon(store: &ArtifactStore, view: View, step: u32, frame_ref: &str, icon: &LayeredIcon) -> Result<LayerManifest, StoreError> {
    let layers = icon
        .layers
        .iter()
        .map(|l| {
            Ok(LayerRef {
                mask_ref: store.put_mask(&l.mask)?,
                area: l.area,
                order_index: l.order_index,
                fill: l.fill,
            })
        })
        .collect::<Result<_, StoreError>>()?;
    Ok(LayerManifest {
        view,
        step,
        frame_ref: frame_ref.to_string(),
        alpha: icon.alpha,
        layers,
        composite_ref: store.put_png(&icon.composite)?,
    })
}

fn backend_failures(report_failures: &[(usize, usize, StyleVariant, BackendError)]) -> Result<(), StageError> {
    match report_failures.first() {
        None => Ok(()),
        Some((row, col, variant, e)) => Err(StageError::Backend {
            context: format!(
                "restyle {} at cell ({row}, {col}); {} cell variant(s) failed",
                variant.as_str(),
                report_failures.len()
            ),
            source: e.clone(),
        }),
    }
}

fn manifest_for(
    store: &ArtifactStore,
    concept: &str,
    grid: &IconGrid,
    layer_refs: &BTreeMap<(View, u32), String>,
) -> Result<GridManifest, StageError> {
    let mut icons = Vec::with_capacity(grid.cells.len());
    for cell in &grid.cells {
        let Provenance { view, step } = cell.provenance;
        let layers_ref = layer_refs
            .get(&(view, step))
            .cloned()
            .ok_or_else(|| StageError::Invalid(format!("no layers for {} step {step}", view.as_str())))?;
        icons.push(IconManifest {
            row: cell.row,
            col: cell.col,
            semantic_level: cell.semantic_level,
            complexity_level: cell.complexity_level,
            provenance: CellProvenance { view, step, layers_ref },
            composite_ref: store.put_png(&cell.composite)?,
            variants: cell
                .variants
                .iter()
                .map(|(v, img)| Ok((*v, store.put_png(img)?)))
                .collect::<Result<_, StoreError>>()?,
            failed: cell.failed.clone(),
        });
    }
    let mut sheets = Vec::new();
    let mut cells = Vec::new();
    for sheet in export_grid(grid)? {
        for c in &sheet.cells {
            let icon = &icons[c.row * grid.columns + c.col];
            cells.push(CellManifest {
                row: c.row,
                col: c.col,
                variant: sheet.variant,
                png_ref: icon.variants[&sheet.variant].clone(),
                rect: c.rect,
                channels: c.channels,
                provenance: icon.provenance.clone(),
            });
        }
        sheets.push(SheetManifest {
            variant: sheet.variant,
            png_ref: store.put_png(&sheet.sheet)?,
            width: sheet.sheet.width(),
            height: sheet.sheet.height(),
        });
    }
    Ok(GridManifest {
        concept: concept.to_string(),
        rows: IconGrid::ROWS,
        columns: grid.columns,
        row_views: ROW_ORDER
            .into_iter()
            .enumerate()
            .map(|(row, view)| RowManifest {
                row,
                view,
                semantic_level: view.semantic_level(),
            })
            .collect(),
        variants: grid.complete_variants(),
        cells,
        sheets,
        icons,
    })
}

/// Layers every view's representatives, assembles and restyles the grid
/// (Outline always) and exports sprite sheets. Any restyle failure fails
/// the stage.
pub fn grid(
    ctx: &StageContext,
    concept: &str,
    views: &BTreeMap<View, ViewSnapshot>,
    columns: Option<usize>,
    picks: Option<&BTreeMap<View, Vec<u32>>>,
) -> Result<GridSnapshot, StageError> {
    let columns = columns.unwrap_or(ctx.config.columns as usize);
    let mut icons = BTreeMap::new();
    let mut layers = BTreeMap::new();
    let mut layer_refs = BTreeMap::new();
    for (&view, snap) in views {
        let reps = snap.representatives();
        let frames: Vec<(u32, Raster)> = reps
            .iter()
            .map(|&(step, r)| Ok((step, ctx.store.get_png(r)?)))
            .collect::<Result<_, StoreError>>()?;
        let layered = layer_frames(view, frames.iter().map(|(s, img)| (*s, img)), ctx.backends, ctx.config.alpha)?;
        let mut manifests = Vec::with_capacity(layered.len());
        for ((step, icon), (_, frame_ref)) in layered.iter().zip(&reps) {
            let m = store_icon(ctx.store, view, *step, frame_ref, icon)?;
            layer_refs.insert((view, *step), ctx.store.put_json(&m)?);
            manifests.push(m);
        }
        layers.insert(view, manifests);
        icons.insert(view, layered);
    }
    let built = grid_from_icons(icons, ctx.backends, columns, picks, &BTreeSet::new())?;
    backend_failures(&built.report.failures)?;
    Ok(GridSnapshot {
        manifest: manifest_for(ctx.store, concept, &built.grid, &layer_refs)?,
        layers,
    })
}

/// Rebuilds the in-memory grid from a manifest.
pub fn load_grid(store: &ArtifactStore, manifest: &GridManifest) -> Result<IconGrid, StoreError> {
    let cells = manifest
        .icons
        .iter()
        .map(|c| {
            Ok(GridCell {
                row: c.row,
                col: c.col,
                semantic_level: c.semantic_level,
                complexity_level: c.complexity_level,
                provenance: Provenance {
                    view: c.provenance.view,
                    step: c.provenance.step,
                },
                composite: store.get_png(&c.composite_ref)?,
                variants: c
                    .variants
                    .iter()
                    .map(|(v, r)| Ok((*v, store.get_png(r)?)))
                    .collect::<Result<_, StoreError>>()?,
                failed: c.failed.clone(),
            })
        })
        .collect::<Result<_, StoreError>>()?;
    Ok(IconGrid {
        columns: manifest.columns,
        cells,
    })
}

/// Adds `variants` (and Outline) to an existing grid.
pub fn restyle(
    ctx: &StageContext,
    snapshot: &GridSnapshot,
    variants: &BTreeSet<StyleVariant>,
) -> Result<GridSnapshot, StageError> {
    let mut grid = load_grid(ctx.store, &snapshot.manifest)?;
    let report = restyle_grid(&mut grid, variants, &*ctx.backends.restyler);
    backend_failures(&report.failures)?;
    let layer_refs = snapshot
        .manifest
        .icons
        .iter()
        .map(|c| ((c.provenance.view, c.provenance.step), c.provenance.layers_ref.clone()))
        .collect();
    Ok(GridSnapshot {
        manifest: manifest_for(ctx.store, &snapshot.manifest.concept, &grid, &layer_refs)?,
        layers: snapshot.layers.clone(),
    })
}

/// Parses `outline,filled,color`.
pub fn parse_variants(list: &str) -> Result<BTreeSet<StyleVariant>, StageError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| StyleVariant::parse(s).ok_or_else(|| StageError::Invalid(format!("unknown style `{s}`"))))
        .collect()
}
