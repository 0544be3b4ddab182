//! The 3×C icon grid: rows by semantic richness, columns by visual
//! complexity, plus style variants and sprite-sheet export.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, Restyler, StyleVariant};
use crate::imaging::{Channels, ImagingError, Raster};
use crate::scaffold::View;

pub const DEFAULT_COLUMNS: usize = 3;
pub const MAX_COLUMNS: usize = 9;
pub const GUTTER: u32 = 8;

/// Top to bottom: richest composition first.
pub const ROW_ORDER: [View; 3] = [View::Macroscopic, View::Microscopic, View::Comparative];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("columns must be in 1..={MAX_COLUMNS}, got {0}")]
    InvalidColumns(usize),
    #[error("no frames supplied for the {0:?} row")]
    MissingRow(View),
    #[error("the {0:?} row was supplied twice")]
    DuplicateRow(View),
    #[error("{view:?} row has {frames} frames, needs {columns}")]
    InsufficientFrames { view: View, frames: usize, columns: usize },
    #[error("{view:?} row has duplicate step {step}")]
    DuplicateStep { view: View, step: u32 },
    #[error("picks for the {0:?} row are not strictly increasing")]
    NonMonotonicPicks(View),
    #[error("{view:?} row expects {expected} picks, got {found}")]
    PickCount { view: View, expected: usize, found: usize },
    #[error("{view:?} row has no frame at step {step}")]
    UnknownPick { view: View, step: u32 },
    #[error("no variant is complete on every cell")]
    IncompleteVariant,
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

/// One candidate frame of a row: its step in the simplification sequence
/// and its layered composite.
#[derive(Clone, Debug, PartialEq)]
pub struct RowFrame {
    pub step: u32,
    pub composite: Raster,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowInput {
    pub view: View,
    pub frames: Vec<RowFrame>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub view: View,
    pub step: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridCell {
    pub row: usize,
    pub col: usize,
    pub semantic_level: u8,
    /// 1 is the leftmost, most detailed column.
    pub complexity_level: usize,
    pub provenance: Provenance,
    pub composite: Raster,
    pub variants: BTreeMap<StyleVariant, Raster>,
    pub failed: BTreeMap<StyleVariant, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IconGrid {
    pub columns: usize,
    /// Row-major, `3 × columns`.
    pub cells: Vec<GridCell>,
}

impl IconGrid {
    pub const ROWS: usize = 3;

    pub fn cell(&self, row: usize, col: usize) -> &GridCell {
        &self.cells[row * self.columns + col]
    }

    pub fn row(&self, row: usize) -> &[GridCell] {
        &self.cells[row * self.columns..(row + 1) * self.columns]
    }

    pub fn is_complete(&self, variant: StyleVariant) -> bool {
        self.cells.iter().all(|c| c.variants.contains_key(&variant))
    }

    pub fn complete_variants(&self) -> Vec<StyleVariant> {
        StyleVariant::ALL.into_iter().filter(|&v| self.is_complete(v)).collect()
    }

    /// Picked steps per row, top to bottom.
    pub fn picks(&self) -> Vec<Vec<u32>> {
        (0..Self::ROWS)
            .map(|r| self.row(r).iter().map(|c| c.provenance.step).collect())
            .collect()
    }
}

/// 1-based ranks of `columns` evenly spaced picks among `k` frames:
/// `1 + round(i·(k−1)/(C−1))`, or the middle rank `⌈k/2⌉` for one column.
pub fn default_ranks(k: usize, columns: usize) -> Vec<usize> {
    if columns == 1 {
        return alloc::vec![k.div_ceil(2)];
    }
    let span = columns - 1;
    (0..columns)
        .map(|i| 1 + (2 * i * (k - 1) + span) / (2 * span))
        .collect()
}

/// Picks one frame per column for each of the three rows.
///
/// Frames are taken in step order. Without explicit `picks`, columns use
/// [`default_ranks`]; explicit picks name steps and must be strictly
/// increasing. The returned grid carries composites only; run
/// [`restyle_grid`] to populate variants.
pub fn assemble_grid(
    rows: &[RowInput],
    columns: usize,
    picks: Option<&BTreeMap<View, Vec<u32>>>,
) -> Result<IconGrid, GridError> {
    if !(1..=MAX_COLUMNS).contains(&columns) {
        return Err(GridError::InvalidColumns(columns));
    }
    let mut by_view: BTreeMap<View, Vec<&RowFrame>> = BTreeMap::new();
    for input in rows {
        if by_view.contains_key(&input.view) {
            return Err(GridError::DuplicateRow(input.view));
        }
        let mut frames: Vec<&RowFrame> = input.frames.iter().collect();
        frames.sort_by_key(|f| f.step);
        if let Some(w) = frames.windows(2).find(|w| w[0].step == w[1].step) {
            return Err(GridError::DuplicateStep { view: input.view, step: w[0].step });
        }
        by_view.insert(input.view, frames);
    }

    let mut cells = Vec::with_capacity(3 * columns);
    for (row, view) in ROW_ORDER.into_iter().enumerate() {
        let frames = by_view.get(&view).ok_or(GridError::MissingRow(view))?;
        if frames.len() < columns {
            return Err(GridError::InsufficientFrames {
                view,
                frames: frames.len(),
                columns,
            });
        }
        let chosen: Vec<&RowFrame> = match picks.and_then(|p| p.get(&view)) {
            Some(steps) => {
                if steps.len() != columns {
                    return Err(GridError::PickCount {
                        view,
                        expected: columns,
                        found: steps.len(),
                    });
                }
                if steps.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(GridError::NonMonotonicPicks(view));
                }
                steps
                    .iter()
                    .map(|&step| {
                        frames
                            .iter()
                            .copied()
                            .find(|f| f.step == step)
                            .ok_or(GridError::UnknownPick { view, step })
                    })
                    .collect::<Result<_, _>>()?
            }
            None => default_ranks(frames.len(), columns)
                .into_iter()
                .map(|rank| frames[rank - 1])
                .collect(),
        };
        for (col, frame) in chosen.into_iter().enumerate() {
            cells.push(GridCell {
                row,
                col,
                semantic_level: view.semantic_level(),
                complexity_level: col + 1,
                provenance: Provenance { view, step: frame.step },
                composite: frame.composite.clone(),
                variants: BTreeMap::new(),
                failed: BTreeMap::new(),
            });
        }
    }
    Ok(IconGrid { columns, cells })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RestyleReport {
    pub calls: usize,
    pub failures: Vec<(usize, usize, StyleVariant, BackendError)>,
}

/// Adds the requested variants to every cell. Outline is derived from the
/// layered composite; Filled and Color are derived from Outline, which is
/// produced first when missing. Variants already present are kept.
/// A failed cell is recorded in the report and in the cell's `failed` map;
/// variants depending on a failed Outline fail with it.
pub fn restyle_grid(grid: &mut IconGrid, variants: &BTreeSet<StyleVariant>, restyler: &dyn Restyler) -> RestyleReport {
    let mut report = RestyleReport::default();
    let mut wanted: BTreeSet<StyleVariant> = variants.clone();
    if !wanted.is_empty() {
        wanted.insert(StyleVariant::Outline);
    }
    for cell in grid.cells.iter_mut() {
        for variant in StyleVariant::ALL.into_iter().filter(|v| wanted.contains(v)) {
            if cell.variants.contains_key(&variant) {
                continue;
            }
            let source = match variant {
                StyleVariant::Outline => Ok(&cell.composite),
                _ => cell
                    .variants
                    .get(&StyleVariant::Outline)
                    .ok_or_else(|| BackendError::Unavailable("outline variant failed".into())),
            };
            let result = source.and_then(|src| {
                report.calls += 1;
                restyler.restyle(src, variant)
            });
            match result {
                Ok(img) => {
                    cell.failed.remove(&variant);
                    cell.variants.insert(variant, img);
                }
                Err(e) => {
                    cell.failed.insert(variant, alloc::format!("{e}"));
                    report.failures.push((cell.row, cell.col, variant, e));
                }
            }
        }
    }
    report
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheetCell {
    pub row: usize,
    pub col: usize,
    pub rect: Rect,
    /// Layout of the original cell raster; gray cells are stored promoted
    /// to RGBA when the sheet mixes layouts.
    pub channels: Channels,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpriteSheet {
    pub variant: StyleVariant,
    pub sheet: Raster,
    pub cells: Vec<SheetCell>,
}

impl SpriteSheet {
    /// The cell raster exactly as it was before tiling.
    pub fn extract(&self, cell: &SheetCell) -> Result<Raster, ImagingError> {
        let r = cell.rect;
        let img = self.sheet.crop(r.x, r.y, r.w, r.h)?;
        Ok(match cell.channels {
            Channels::Gray8 => img.to_gray(),
            Channels::Rgba8 => img.to_rgba(),
        })
    }
}

/// Tiles one variant row-major on white with [`GUTTER`]-pixel gutters.
/// Each tile is as large as the largest cell; cells sit at the tile's
/// top-left corner.
pub fn export_variant(grid: &IconGrid, variant: StyleVariant) -> Result<SpriteSheet, GridError> {
    if !grid.is_complete(variant) {
        return Err(GridError::IncompleteVariant);
    }
    let images: Vec<&Raster> = grid.cells.iter().map(|c| &c.variants[&variant]).collect();
    let tile_w = images.iter().map(|i| i.width()).max().unwrap_or(1);
    let tile_h = images.iter().map(|i| i.height()).max().unwrap_or(1);
    let channels = if images.iter().all(|i| i.channels() == Channels::Gray8) {
        Channels::Gray8
    } else {
        Channels::Rgba8
    };
    let cols = grid.columns as u32;
    let rows = IconGrid::ROWS as u32;
    let width = cols * tile_w + (cols + 1) * GUTTER;
    let height = rows * tile_h + (rows + 1) * GUTTER;
    let white: &[u8] = match channels {
        Channels::Gray8 => &[255],
        Channels::Rgba8 => &[255, 255, 255, 255],
    };
    let mut sheet = Raster::filled(width, height, channels, white)?;
    let mut cells = Vec::with_capacity(images.len());
    for (cell, img) in grid.cells.iter().zip(images) {
        let x = GUTTER + cell.col as u32 * (tile_w + GUTTER);
        let y = GUTTER + cell.row as u32 * (tile_h + GUTTER);
        let tile = match channels {
            Channels::Gray8 => img.clone(),
            Channels::Rgba8 => img.to_rgba(),
        };
        sheet.blit(&tile, x, y)?;
        cells.push(SheetCell {
            row: cell.row,
            col: cell.col,
            rect: Rect { x, y, w: img.width(), h: img.height() },
            channels: img.channels(),
        });
    }
    Ok(SpriteSheet { variant, sheet, cells })
}

/// One sheet per complete variant.
pub fn export_grid(grid: &IconGrid) -> Result<Vec<SpriteSheet>, GridError> {
    let complete = grid.complete_variants();
    if complete.is_empty() {
        return Err(GridError::IncompleteVariant);
    }
    complete.into_iter().map(|v| export_variant(grid, v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::mock::MockRestyler;
    use alloc::vec;

    fn frames(n: u32, side: u32) -> Vec<RowFrame> {
        (0..n)
            .map(|i| RowFrame {
                step: i * 5,
                composite: Raster::filled(side, side, Channels::Gray8, &[(i * 20) as u8]).unwrap(),
            })
            .collect()
    }

    fn rows(n: u32, side: u32) -> Vec<RowInput> {
        View::CHAIN
            .into_iter()
            .map(|view| RowInput { view, frames: frames(n, side) })
            .collect()
    }

    #[test]
    fn even_ranks() {
        assert_eq!(default_ranks(9, 3), vec![1, 5, 9]);
        assert_eq!(default_ranks(9, 1), vec![5]);
        assert_eq!(default_ranks(4, 4), vec![1, 2, 3, 4]);
        assert_eq!(default_ranks(10, 3), vec![1, 6, 10]);
    }

    #[test]
    fn default_assembly() {
        let g = assemble_grid(&rows(9, 4), 3, None).unwrap();
        assert_eq!(g.cells.len(), 9);
        assert_eq!(g.cell(0, 0).provenance.view, View::Macroscopic);
        assert_eq!(g.cell(2, 0).semantic_level, 1);
        assert_eq!(g.picks(), vec![vec![0, 20, 40]; 3]);
        let one = assemble_grid(&rows(9, 4), 1, None).unwrap();
        assert_eq!(one.picks(), vec![vec![20]; 3]);
    }

    #[test]
    fn assembly_errors() {
        assert!(matches!(
            assemble_grid(&rows(2, 4), 3, None),
            Err(GridError::InsufficientFrames { frames: 2, .. })
        ));
        assert!(matches!(assemble_grid(&rows(9, 4)[..2], 3, None), Err(GridError::MissingRow(_))));
        let mut picks = BTreeMap::new();
        picks.insert(View::Microscopic, vec![20, 10, 40]);
        assert!(matches!(
            assemble_grid(&rows(9, 4), 3, Some(&picks)),
            Err(GridError::NonMonotonicPicks(View::Microscopic))
        ));
        picks.insert(View::Microscopic, vec![10, 12, 40]);
        assert!(matches!(
            assemble_grid(&rows(9, 4), 3, Some(&picks)),
            Err(GridError::UnknownPick { step: 12, .. })
        ));
        picks.insert(View::Microscopic, vec![5, 10, 15]);
        let g = assemble_grid(&rows(9, 4), 3, Some(&picks)).unwrap();
        assert_eq!(g.picks()[1], vec![5, 10, 15]);
        assert!(matches!(assemble_grid(&rows(9, 4), 0, None), Err(GridError::InvalidColumns(0))));
    }

    #[test]
    fn restyle_call_counts() {
        let mut g = assemble_grid(&rows(9, 4), 3, None).unwrap();
        let r = restyle_grid(&mut g, &BTreeSet::from([StyleVariant::Outline]), &MockRestyler::default());
        assert_eq!(r.calls, 9);
        assert_eq!(g.complete_variants(), vec![StyleVariant::Outline]);
        let mut fresh = assemble_grid(&rows(9, 4), 3, None).unwrap();
        let all = BTreeSet::from(StyleVariant::ALL);
        assert_eq!(restyle_grid(&mut fresh, &all, &MockRestyler::default()).calls, 27);
        assert_eq!(restyle_grid(&mut fresh, &all, &MockRestyler::default()).calls, 0);
    }

    #[test]
    fn sheet_size_and_round_trip() {
        let mut g = assemble_grid(&rows(9, 256), 3, None).unwrap();
        restyle_grid(&mut g, &BTreeSet::from(StyleVariant::ALL), &MockRestyler::default());
        let sheets = export_grid(&g).unwrap();
        assert_eq!(sheets.len(), 3);
        for s in &sheets {
            assert_eq!(s.sheet.dimensions(), (800, 800));
            assert_eq!(s.cells.len(), 9);
            for (meta, cell) in s.cells.iter().zip(&g.cells) {
                assert_eq!(&s.extract(meta).unwrap(), &cell.variants[&s.variant]);
            }
        }
    }

    #[test]
    fn export_needs_a_complete_variant() {
        let g = assemble_grid(&rows(9, 4), 3, None).unwrap();
        assert!(matches!(export_grid(&g), Err(GridError::IncompleteVariant)));
    }
}
