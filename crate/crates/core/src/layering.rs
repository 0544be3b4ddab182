//! Area-ordered translucent mask layers over a simplified frame.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, Segmenter};
use crate::imaging::{composite_layers, BinaryMask, Channels, ImagingError, Layer, Raster, Rgba};

pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayeringError {
    #[error("alpha {0} is outside [0, 1]")]
    InvalidAlpha(f64),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("segmentation mask does not fit the frame: {0}")]
    Imaging(#[from] ImagingError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IconLayer {
    pub mask: BinaryMask,
    pub area: usize,
    /// 0 is the backmost layer.
    pub order_index: usize,
    pub fill: Rgba,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    pub area: usize,
    pub order_index: usize,
    pub fill: Rgba,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayeredIcon {
    pub base: Raster,
    pub layers: Vec<IconLayer>,
    pub composite: Raster,
    pub alpha: f64,
}

impl LayeredIcon {
    /// True when segmentation found nothing and the composite is the frame.
    pub fn is_passthrough(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn summary(&self) -> Vec<LayerSummary> {
        self.layers
            .iter()
            .map(|l| LayerSummary {
                area: l.area,
                order_index: l.order_index,
                fill: l.fill,
            })
            .collect()
    }

    pub fn recomposite(&self) -> Result<Raster, ImagingError> {
        let layers: Vec<Layer> = self
            .layers
            .iter()
            .map(|l| Layer {
                mask: l.mask.clone(),
                fill: l.fill,
                alpha: l.alpha,
            })
            .collect();
        composite_layers(&self.base, &layers)
    }
}

fn scan_key(mask: &BinaryMask) -> u64 {
    mask.first_set()
        .map(|(x, y)| y as u64 * mask.width() as u64 + x as u64)
        .unwrap_or(u64::MAX)
}

/// Largest first; equal areas go by first set pixel in row-major order.
pub fn order_masks(mut masks: Vec<BinaryMask>) -> Vec<BinaryMask> {
    masks.sort_by(|a, b| b.area().cmp(&a.area()).then_with(|| scan_key(a).cmp(&scan_key(b))));
    masks
}

/// Mean colour of `frame` under `mask`, rounded half-up; `None` when the
/// mask is empty.
pub fn mean_color(frame: &Raster, mask: &BinaryMask) -> Option<Rgba> {
    let n = mask.area() as u64;
    if n == 0 {
        return None;
    }
    let c = frame.channels().count();
    let mut sum = [0u64; 3];
    for i in mask.indices() {
        let px = &frame.data()[i * c..i * c + c];
        match frame.channels() {
            Channels::Gray8 => sum.iter_mut().for_each(|s| *s += px[0] as u64),
            Channels::Rgba8 => (0..3).for_each(|k| sum[k] += px[k] as u64),
        }
    }
    let [r, g, b] = sum.map(|s| ((2 * s + n) / (2 * n)) as u8);
    Some(Rgba([r, g, b, 255]))
}

/// Segments `frame`, orders the masks by area and composites them over the
/// frame, each filled with the mean frame colour beneath it. Empty masks
/// are dropped.
pub fn build_layered_icon(frame: &Raster, segmenter: &dyn Segmenter, alpha: f64) -> Result<LayeredIcon, LayeringError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(LayeringError::InvalidAlpha(alpha));
    }
    let masks = segmenter.segment(frame)?;
    for m in &masks {
        if m.dimensions() != frame.dimensions() {
            return Err(ImagingError::DimensionMismatch {
                expected: frame.dimensions(),
                actual: m.dimensions(),
            }
            .into());
        }
    }
    let layers: Vec<IconLayer> = order_masks(masks)
        .into_iter()
        .filter_map(|mask| {
            let fill = mean_color(frame, &mask)?;
            Some((mask, fill))
        })
        .enumerate()
        .map(|(order_index, (mask, fill))| IconLayer {
            area: mask.area(),
            mask,
            order_index,
            fill,
            alpha,
        })
        .collect();
    let mut icon = LayeredIcon {
        base: frame.clone(),
        layers,
        composite: frame.clone(),
        alpha,
    };
    icon.composite = icon.recomposite()?;
    Ok(icon)
}
