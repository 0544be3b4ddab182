//! Stage glue shared by the batch runner and the session service.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::backend::{BackendError, BackendSet, FeatureVector, StyleVariant};
use crate::config::PipelineConfig;
use crate::grid::{assemble_grid, restyle_grid, GridError, IconGrid, RestyleReport, RowFrame, RowInput};
use crate::imaging::Raster;
use crate::layering::{build_layered_icon, LayeredIcon, LayeringError};
use crate::scaffold::View;
use crate::selection::{export_scatter, select_representatives, ClusteringResult, Scatter, SelectionError};
use crate::simplification::{run_simplification, SimplificationError, SimplificationSequence, StopRule};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("{view:?}: {source}")]
    Simplification { view: View, source: SimplificationError },
    #[error("{view:?}: feature extraction failed: {source}")]
    Features { view: View, source: BackendError },
    #[error("{view:?}: {source}")]
    Selection { view: View, source: SelectionError },
    #[error("{view:?}: {source}")]
    Layering { view: View, source: LayeringError },
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl PipelineError {
    /// The backend failure behind this error, if any.
    pub fn backend(&self) -> Option<&BackendError> {
        match self {
            PipelineError::Simplification {
                source: SimplificationError::Backend { source, .. },
                ..
            } => Some(source),
            PipelineError::Features { source, .. } => Some(source),
            PipelineError::Layering {
                source: LayeringError::Backend(source),
                ..
            } => Some(source),
            _ => None,
        }
    }
}

/// Simplification, features and clustering for one exemplar.
#[derive(Clone, Debug, PartialEq)]
pub struct ViewRun {
    pub view: View,
    pub sequence: SimplificationSequence,
    pub features: Vec<FeatureVector>,
    pub clustering: ClusteringResult,
    pub scatter: Scatter,
}

impl ViewRun {
    pub fn steps(&self) -> Vec<u32> {
        self.sequence.frames.iter().map(|f| f.step).collect()
    }

    /// Representative frames in step order.
    pub fn representatives(&self) -> impl Iterator<Item = (u32, &Raster)> + '_ {
        self.clustering.representatives.iter().map(|&i| {
            let f = &self.sequence.frames[i];
            (f.step, &f.image)
        })
    }
}

pub fn simplify_view(
    view: View,
    exemplar: &Raster,
    backends: &BackendSet,
    config: &PipelineConfig,
) -> Result<ViewRun, PipelineError> {
    let rule = StopRule::from(config);
    let sequence = run_simplification(exemplar, &*backends.simplifier, &*backends.metric, &rule)
        .map_err(|source| PipelineError::Simplification { view, source })?;
    let features = sequence
        .frames
        .iter()
        .map(|f| backends.features.extract_features(&f.image))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| PipelineError::Features { view, source })?;
    let selection_err = |source| PipelineError::Selection { view, source };
    let clustering =
        select_representatives(&sequence, &features, config.k as usize, config.seed).map_err(selection_err)?;
    let steps: Vec<u32> = sequence.frames.iter().map(|f| f.step).collect();
    let scatter = export_scatter(&clustering, &features, &steps).map_err(selection_err)?;
    Ok(ViewRun {
        view,
        sequence,
        features,
        clustering,
        scatter,
    })
}

/// Layers `frames` (step, image) in the given order.
pub fn layer_frames<'a>(
    view: View,
    frames: impl IntoIterator<Item = (u32, &'a Raster)>,
    backends: &BackendSet,
    alpha: f64,
) -> Result<Vec<(u32, LayeredIcon)>, PipelineError> {
    frames
        .into_iter()
        .map(|(step, image)| {
            build_layered_icon(image, &*backends.segmenter, alpha)
                .map(|icon| (step, icon))
                .map_err(|source| PipelineError::Layering { view, source })
        })
        .collect()
}

/// Layered icons for every representative of `run`, in step order.
pub fn layer_view(run: &ViewRun, backends: &BackendSet, alpha: f64) -> Result<Vec<(u32, LayeredIcon)>, PipelineError> {
    layer_frames(run.view, run.representatives(), backends, alpha)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridBuild {
    pub icons: BTreeMap<View, Vec<(u32, LayeredIcon)>>,
    pub grid: IconGrid,
    pub report: RestyleReport,
}

/// Assembles the grid from per-view layered representatives and restyles
/// it with `variants` (Outline is always produced).
pub fn grid_from_icons(
    icons: BTreeMap<View, Vec<(u32, LayeredIcon)>>,
    backends: &BackendSet,
    columns: usize,
    picks: Option<&BTreeMap<View, Vec<u32>>>,
    variants: &BTreeSet<StyleVariant>,
) -> Result<GridBuild, PipelineError> {
    let rows: Vec<RowInput> = icons
        .iter()
        .map(|(&view, list)| RowInput {
            view,
            frames: list
                .iter()
                .map(|(step, icon)| RowFrame {
                    step: *step,
                    composite: icon.composite.clone(),
                })
                .collect(),
        })
        .collect();
    let mut grid = assemble_grid(&rows, columns, picks)?;
    let mut wanted = variants.clone();
    wanted.insert(StyleVariant::Outline);
    let report = restyle_grid(&mut grid, &wanted, &*backends.restyler);
    Ok(GridBuild { icons, grid, report })
}

/// Layers every view's representatives, then [`grid_from_icons`].
pub fn build_grid(
    runs: &[ViewRun],
    backends: &BackendSet,
    config: &PipelineConfig,
    columns: usize,
    picks: Option<&BTreeMap<View, Vec<u32>>>,
    variants: &BTreeSet<StyleVariant>,
) -> Result<GridBuild, PipelineError> {
    let mut icons = BTreeMap::new();
    for run in runs {
        icons.insert(run.view, layer_view(run, backends, config.alpha)?);
    }
    grid_from_icons(icons, backends, columns, picks, variants)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_view_to_grid() {
        let backends = BackendSet::mock();
        let config = PipelineConfig::default();
        let runs: Vec<ViewRun> = View::CHAIN
            .into_iter()
            .map(|view| {
                let img = backends.generator.generate(view.as_str(), None).unwrap();
                simplify_view(view, &img, &backends, &config).unwrap()
            })
            .collect();
        for run in &runs {
            assert_eq!(run.clustering.representatives.len(), 9);
        }
        let built = build_grid(&runs, &backends, &config, 3, None, &BTreeSet::new()).unwrap();
        assert_eq!(built.report.calls, 9);
        assert_eq!(built.grid.complete_variants(), alloc::vec![StyleVariant::Outline]);
    }
}
