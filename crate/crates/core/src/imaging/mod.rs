//! Raster primitives shared by every visual stage.
//!
//! Foreground is dark: a pixel belongs to the foreground when its luminance
//! is below the binarization threshold. Luminance for RGBA pixels is rec-601
//! luma after compositing the pixel over white using its alpha.

mod components;
mod composite;
pub mod filter;
mod mask;

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use components::{connected_components, ComponentLabels, Connectivity};
pub use composite::{composite_layers, Layer, Rgba};
pub use mask::BinaryMask;

/// Default luminance threshold separating dark strokes from the background.
pub const DEFAULT_THRESHOLD: u8 = 128;

/// Side length of the grayscale thumbnail used by the reference metric and
/// reference features.
pub const REFERENCE_SIDE: u32 = 32;

/// Luminance values are kept as exact integers scaled by this factor
/// (1000 for the rec-601 weights, 255 for the alpha premultiply).
const LUMA_SCALE: u64 = 255_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ImagingError {
    #[error("raster dimensions must be non-zero, got {width}x{height}")]
    EmptyDimensions { width: u32, height: u32 },
    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    DataLength { expected: usize, actual: usize },
    #[error("dimension mismatch: expected {}x{}, got {}x{}", expected.0, expected.1, actual.0, actual.1)]
    DimensionMismatch { expected: (u32, u32), actual: (u32, u32) },
    #[error("alpha must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channels {
    Gray8,
    Rgba8,
}

impl Channels {
    pub const fn count(self) -> usize {
        match self {
            Channels::Gray8 => 1,
            Channels::Rgba8 => 4,
        }
    }
}

/// Decoded 8-bit image, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Raster {
    width: u32,
    height: u32,
    channels: Channels,
    data: Vec<u8>,
}

impl core::fmt::Debug for Raster {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Raster")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .field("bytes", &self.data.len())
            .finish()
    }
}

fn check_dims(width: u32, height: u32) -> Result<(), ImagingError> {
    if width == 0 || height == 0 {
        Err(ImagingError::EmptyDimensions { width, height })
    } else {
        Ok(())
    }
}

impl Raster {
    pub fn new(
        width: u32,
        height: u32,
        channels: Channels,
        data: Vec<u8>,
    ) -> Result<Self, ImagingError> {
        check_dims(width, height)?;
        let expected = width as usize * height as usize * channels.count();
        if data.len() != expected {
            return Err(ImagingError::DataLength {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn gray(width: u32, height: u32, data: Vec<u8>) -> Result<Self, ImagingError> {
        Self::new(width, height, Channels::Gray8, data)
    }

    /// Uniform raster; `pixel` must hold one value per channel.
    pub fn filled(
        width: u32,
        height: u32,
        channels: Channels,
        pixel: &[u8],
    ) -> Result<Self, ImagingError> {
        check_dims(width, height)?;
        if pixel.len() != channels.count() {
            return Err(ImagingError::DataLength {
                expected: channels.count(),
                actual: pixel.len(),
            });
        }
        let n = width as usize * height as usize;
        let mut data = Vec::with_capacity(n * pixel.len());
        for _ in 0..n {
            data.extend_from_slice(pixel);
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Channel values of the pixel at `(x, y)`.
    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let c = self.channels.count();
        let i = (y as usize * self.width as usize + x as usize) * c;
        &self.data[i..i + c]
    }

    /// Exact luminance of pixel `index`, scaled by 255 000.
    pub(crate) fn luma_scaled(&self, index: usize) -> u64 {
        match self.channels {
            Channels::Gray8 => self.data[index] as u64 * LUMA_SCALE,
            Channels::Rgba8 => {
                let p = &self.data[index * 4..index * 4 + 4];
                let a = p[3] as u64;
                let over = |c: u8| c as u64 * a + 255 * (255 - a);
                299 * over(p[0]) + 587 * over(p[1]) + 114 * over(p[2])
            }
        }
    }

    /// Luminance of pixel `index` in `[0, 255]`.
    pub fn luminance(&self, index: usize) -> f64 {
        self.luma_scaled(index) as f64 / LUMA_SCALE as f64
    }

    /// Grayscale copy; luminance rounded half-up.
    pub fn to_gray(&self) -> Raster {
        if self.channels == Channels::Gray8 {
            return self.clone();
        }
        let data = (0..self.pixel_count())
            .map(|i| ((self.luma_scaled(i) + LUMA_SCALE / 2) / LUMA_SCALE).min(255) as u8)
            .collect();
        Raster {
            width: self.width,
            height: self.height,
            channels: Channels::Gray8,
            data,
        }
    }

    /// Opaque RGBA copy of a gray raster; RGBA rasters are returned as-is.
    pub fn to_rgba(&self) -> Raster {
        if self.channels == Channels::Rgba8 {
            return self.clone();
        }
        let mut data = Vec::with_capacity(self.data.len() * 4);
        for &v in &self.data {
            data.extend_from_slice(&[v, v, v, 255]);
        }
        Raster {
            width: self.width,
            height: self.height,
            channels: Channels::Rgba8,
            data,
        }
    }

    /// Copy of the `w`×`h` window at `(x, y)`.
    pub fn crop(&self, x: u32, y: u32, w: u32, h: u32) -> Result<Raster, ImagingError> {
        check_dims(w, h)?;
        if x + w > self.width || y + h > self.height {
            return Err(ImagingError::DimensionMismatch {
                expected: (self.width, self.height),
                actual: (x + w, y + h),
            });
        }
        let c = self.channels.count();
        let mut data = Vec::with_capacity(w as usize * h as usize * c);
        for row in y..y + h {
            let start = (row as usize * self.width as usize + x as usize) * c;
            data.extend_from_slice(&self.data[start..start + w as usize * c]);
        }
        Ok(Raster {
            width: w,
            height: h,
            channels: self.channels,
            data,
        })
    }

    /// Copies `src` into this raster with its top-left corner at `(x, y)`.
    /// Both rasters must share a channel layout and `src` must fit.
    pub fn blit(&mut self, src: &Raster, x: u32, y: u32) -> Result<(), ImagingError> {
        if src.channels != self.channels
            || x + src.width > self.width
            || y + src.height > self.height
        {
            return Err(ImagingError::DimensionMismatch {
                expected: (self.width, self.height),
                actual: (x + src.width, y + src.height),
            });
        }
        let c = self.channels.count();
        let row_len = src.width as usize * c;
        for row in 0..src.height {
            let dst = ((y + row) as usize * self.width as usize + x as usize) * c;
            let s = row as usize * row_len;
            self.data[dst..dst + row_len].copy_from_slice(&src.data[s..s + row_len]);
        }
        Ok(())
    }

    pub(crate) fn ensure_same_dims(&self, other: (u32, u32)) -> Result<(), ImagingError> {
        if self.dimensions() != other {
            Err(ImagingError::DimensionMismatch {
                expected: self.dimensions(),
                actual: other,
            })
        } else {
            Ok(())
        }
    }
}

/// Foreground mask of pixels whose luminance is strictly below `threshold`.
pub fn binarize(img: &Raster, threshold: u8) -> BinaryMask {
    let limit = threshold as u64 * LUMA_SCALE;
    let mut mask = BinaryMask::new(img.width(), img.height());
    for i in 0..img.pixel_count() {
        if img.luma_scaled(i) < limit {
            mask.set_index(i, true);
        }
    }
    mask
}

/// Box-filter resample onto a `target_w`×`target_h` grid.
///
/// Target cell `(tx, ty)` averages the source block
/// `[tx·w/tw, (tx+1)·w/tw) × [ty·h/th, (ty+1)·h/th)` (at least one pixel),
/// rounding half-up per channel.
pub fn downsample(img: &Raster, target_w: u32, target_h: u32) -> Result<Raster, ImagingError> {
    check_dims(target_w, target_h)?;
    if img.dimensions() == (target_w, target_h) {
        return Ok(img.clone());
    }
    let (w, h) = (img.width() as u64, img.height() as u64);
    let c = img.channels().count();
    let span = |t: u64, src: u64, dst: u64| {
        let lo = t * src / dst;
        let hi = ((t + 1) * src / dst).max(lo + 1);
        (lo as u32, hi as u32)
    };
    let mut data = vec![0u8; target_w as usize * target_h as usize * c];
    let mut sums = vec![0u64; c];
    for ty in 0..target_h {
        let (y0, y1) = span(ty as u64, h, target_h as u64);
        for tx in 0..target_w {
            let (x0, x1) = span(tx as u64, w, target_w as u64);
            sums.iter_mut().for_each(|s| *s = 0);
            for y in y0..y1 {
                for x in x0..x1 {
                    for (s, &v) in sums.iter_mut().zip(img.pixel(x, y)) {
                        *s += v as u64;
                    }
                }
            }
            let count = ((y1 - y0) * (x1 - x0)) as u64;
            let out = (ty as usize * target_w as usize + tx as usize) * c;
            for (k, s) in sums.iter().enumerate() {
                data[out + k] = ((2 * s + count) / (2 * count)) as u8;
            }
        }
    }
    Raster::new(target_w, target_h, img.channels(), data)
}

/// Grayscale thumbnail at the reference resolution.
pub fn reference_thumbnail(img: &Raster) -> Raster {
    downsample(&img.to_gray(), REFERENCE_SIDE, REFERENCE_SIDE)
        .expect("reference side is non-zero")
}

/// Mean squared difference of 32×32 grayscale thumbnails, normalized by
/// 255², so the result lies in `[0, 1]`.
pub fn reference_perceptual_distance(a: &Raster, b: &Raster) -> Result<f64, ImagingError> {
    a.ensure_same_dims(b.dimensions())?;
    let ta = reference_thumbnail(a);
    let tb = reference_thumbnail(b);
    let total: u64 = ta
        .data()
        .iter()
        .zip(tb.data())
        .map(|(&x, &y)| {
            let d = x.abs_diff(y) as u64;
            d * d
        })
        .sum();
    Ok(total as f64 / (ta.pixel_count() as f64 * 255.0 * 255.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_buffers() {
        assert!(matches!(
            Raster::gray(0, 4, vec![]),
            Err(ImagingError::EmptyDimensions { .. })
        ));
        assert!(matches!(
            Raster::new(2, 2, Channels::Rgba8, vec![0; 15]),
            Err(ImagingError::DataLength { expected: 16, actual: 15 })
        ));
    }

    #[test]
    fn binarize_examples() {
        let white = Raster::filled(4, 4, Channels::Gray8, &[255]).unwrap();
        assert_eq!(binarize(&white, 128).area(), 0);
        let black = Raster::filled(4, 4, Channels::Gray8, &[0]).unwrap();
        assert_eq!(binarize(&black, 128).area(), 16);
        let pair = Raster::gray(2, 1, vec![100, 200]).unwrap();
        let m = binarize(&pair, 128);
        assert_eq!(m.area(), 1);
        assert!(m.get(0, 0));
        assert!(!m.get(1, 0));
    }

    #[test]
    fn rgba_luma_composites_over_white() {
        // Fully transparent black reads as white background.
        let clear = Raster::new(1, 1, Channels::Rgba8, vec![0, 0, 0, 0]).unwrap();
        assert_eq!(binarize(&clear, 128).area(), 0);
        let opaque = Raster::new(1, 1, Channels::Rgba8, vec![0, 0, 0, 255]).unwrap();
        assert_eq!(binarize(&opaque, 128).area(), 1);
        // Gray encoded as opaque RGBA keeps its exact value at the threshold.
        let edge = Raster::new(1, 1, Channels::Rgba8, vec![128, 128, 128, 255]).unwrap();
        assert_eq!(binarize(&edge, 128).area(), 0);
        assert_eq!(edge.to_gray().data(), &[128]);
    }

    #[test]
    fn downsample_examples() {
        let flat = Raster::filled(4, 4, Channels::Gray8, &[77]).unwrap();
        let small = downsample(&flat, 2, 2).unwrap();
        assert_eq!(small.data(), &[77; 4]);

        let ramp = Raster::gray(2, 2, vec![0, 0, 255, 255]).unwrap();
        assert_eq!(downsample(&ramp, 1, 1).unwrap().data(), &[128]);

        let any = Raster::gray(3, 2, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(downsample(&any, 3, 2).unwrap(), any);
    }

    #[test]
    fn upsampling_repeats_pixels() {
        let px = Raster::gray(1, 1, vec![9]).unwrap();
        assert_eq!(downsample(&px, 3, 2).unwrap().data(), &[9; 6]);
    }

    #[test]
    fn perceptual_distance_extremes() {
        let black = Raster::filled(40, 40, Channels::Gray8, &[0]).unwrap();
        let white = Raster::filled(40, 40, Channels::Gray8, &[255]).unwrap();
        assert_eq!(reference_perceptual_distance(&black, &black).unwrap(), 0.0);
        assert_eq!(reference_perceptual_distance(&black, &white).unwrap(), 1.0);
        let other = Raster::filled(41, 40, Channels::Gray8, &[0]).unwrap();
        assert!(matches!(
            reference_perceptual_distance(&black, &other),
            Err(ImagingError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn crop_and_blit_round_trip() {
        let src = Raster::gray(3, 3, (0..9).collect()).unwrap();
        let mut canvas = Raster::filled(5, 5, Channels::Gray8, &[255]).unwrap();
        canvas.blit(&src, 1, 2).unwrap();
        assert_eq!(canvas.crop(1, 2, 3, 3).unwrap(), src);
        assert!(canvas.blit(&src, 3, 3).is_err());
    }
}
