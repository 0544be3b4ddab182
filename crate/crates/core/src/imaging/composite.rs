use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{BinaryMask, Channels, ImagingError, Raster};

/// Opaque fill colour of a layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rgba(pub [u8; 4]);

impl Rgba {
    pub const WHITE: Rgba = Rgba([255, 255, 255, 255]);
    pub const BLACK: Rgba = Rgba([0, 0, 0, 255]);

    pub const fn gray(v: u8) -> Self {
        Rgba([v, v, v, 255])
    }

    /// Rec-601 luma rounded half-up (the fill's own alpha is ignored).
    pub fn luma(self) -> u8 {
        let [r, g, b, _] = self.0;
        let scaled = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
        ((scaled + 500) / 1000).min(255) as u8
    }
}

/// A translucent mask painted with a flat colour.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub mask: BinaryMask,
    pub fill: Rgba,
    pub alpha: f64,
}

fn blend(fill: u8, under: u8, alpha: f64) -> u8 {
    let v = alpha * fill as f64 + (1.0 - alpha) * under as f64;
    libm::floor(v + 0.5).clamp(0.0, 255.0) as u8
}

/// Paints `layers` back-to-front over `background` with source-over
/// blending, rounding half-up after every layer.
///
/// Gray backgrounds receive the fill's luma; RGBA backgrounds blend all four
/// channels against the opaque fill.
pub fn composite_layers(background: &Raster, layers: &[Layer]) -> Result<Raster, ImagingError> {
    for layer in layers {
        background.ensure_same_dims(layer.mask.dimensions())?;
        if !(0.0..=1.0).contains(&layer.alpha) {
            return Err(ImagingError::InvalidAlpha(layer.alpha));
        }
    }
    let channels = background.channels();
    let mut data: Vec<u8> = background.data().to_vec();
    for layer in layers {
        let fill: [u8; 4] = match channels {
            Channels::Gray8 => [layer.fill.luma(), 0, 0, 0],
            Channels::Rgba8 => [layer.fill.0[0], layer.fill.0[1], layer.fill.0[2], 255],
        };
        let c = channels.count();
        for i in layer.mask.indices() {
            for (k, px) in data[i * c..i * c + c].iter_mut().enumerate() {
                *px = blend(fill[k], *px, layer.alpha);
            }
        }
    }
    Raster::new(background.width(), background.height(), channels, data)
}
