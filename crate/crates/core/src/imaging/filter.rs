//! Grayscale filters and mask morphology used by the reference backends.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::{BinaryMask, Channels, Raster};

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = libm::ceil(3.0 * sigma) as i64;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|d| libm::exp(-((d * d) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

fn convolve_1d(src: &[f64], dst: &mut [f64], w: usize, h: usize, kernel: &[f64], horizontal: bool) {
    let radius = (kernel.len() / 2) as i64;
    let (len, lanes) = if horizontal { (w, h) } else { (h, w) };
    for lane in 0..lanes {
        for pos in 0..len {
            let mut acc = 0.0;
            for (k, &wt) in kernel.iter().enumerate() {
                let p = (pos as i64 + k as i64 - radius).clamp(0, len as i64 - 1) as usize;
                let idx = if horizontal { lane * w + p } else { p * w + lane };
                acc += wt * src[idx];
            }
            let out = if horizontal { lane * w + pos } else { pos * w + lane };
            dst[out] = acc;
        }
    }
}

/// Separable Gaussian blur of the grayscale version of `img` without
/// rounding, clamping at the borders. `sigma <= 0` returns the gray values.
pub fn blur_values(img: &Raster, sigma: f64) -> Vec<f64> {
    let gray = img.to_gray();
    let src: Vec<f64> = gray.data().iter().map(|&v| v as f64).collect();
    if !(sigma > 0.0) {
        return src;
    }
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    let kernel = gaussian_kernel(sigma);
    let mut tmp = vec![0.0; w * h];
    let mut out = vec![0.0; w * h];
    convolve_1d(&src, &mut tmp, w, h, &kernel, true);
    convolve_1d(&tmp, &mut out, w, h, &kernel, false);
    out
}

/// [`blur_values`] rounded half-up back to 8 bits.
pub fn gaussian_blur(img: &Raster, sigma: f64) -> Raster {
    let data = blur_values(img, sigma)
        .iter()
        .map(|&v| libm::floor(v + 0.5).clamp(0.0, 255.0) as u8)
        .collect();
    Raster::new(img.width(), img.height(), Channels::Gray8, data).expect("same dimensions")
}

/// Re-quantizes `values` so the output has exactly the gray histogram of
/// `reference`: the darkest values receive the darkest level, and so on.
/// Ties are broken by pixel index.
pub fn requantize(values: &[f64], reference: &Raster) -> Raster {
    let gray = reference.to_gray();
    assert_eq!(values.len(), gray.pixel_count(), "values must cover the reference");
    let mut counts = [0usize; 256];
    for &v in gray.data() {
        counts[v as usize] += 1;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut data = vec![0u8; values.len()];
    let mut levels = (0..256usize).flat_map(|l| core::iter::repeat_n(l as u8, counts[l]));
    for i in order {
        data[i] = levels.next().expect("histogram covers every pixel");
    }
    Raster::new(gray.width(), gray.height(), Channels::Gray8, data).expect("same dimensions")
}

/// Evenly spaced gray levels `round(i·255/(n−1))`, `n >= 2`.
pub fn gray_palette(levels: usize) -> Vec<u8> {
    let n = levels.max(2);
    (0..n)
        .map(|i| ((i * 255 * 2 + (n - 1)) / (2 * (n - 1))) as u8)
        .collect()
}

/// Nearest entry of a sorted, non-empty `palette` (ties go to the darker).
pub fn nearest_level(v: u8, palette: &[u8]) -> u8 {
    let mut best = palette[0];
    for &p in palette {
        if p.abs_diff(v) < best.abs_diff(v) {
            best = p;
        }
    }
    best
}

/// Distinct values of a gray raster, ascending.
pub fn distinct_levels(gray: &Raster) -> Vec<u8> {
    let set: BTreeSet<u8> = gray.to_gray().data().iter().copied().collect();
    set.into_iter().collect()
}

/// Maps every pixel of a gray raster to its nearest palette level.
pub fn snap_to(gray: &Raster, palette: &[u8]) -> Raster {
    let gray = gray.to_gray();
    let mut lut = [0u8; 256];
    for (v, slot) in lut.iter_mut().enumerate() {
        *slot = nearest_level(v as u8, palette);
    }
    let data = gray.data().iter().map(|&v| lut[v as usize]).collect();
    Raster::new(gray.width(), gray.height(), Channels::Gray8, data).expect("same dimensions")
}

fn window_extreme(gray: &Raster, darkest: bool) -> Raster {
    let (w, h) = (gray.width() as i64, gray.height() as i64);
    let src = gray.data();
    let mut data = Vec::with_capacity(src.len());
    for y in 0..h {
        for x in 0..w {
            let mut acc = if darkest { 255u8 } else { 0u8 };
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = ((x + dx).clamp(0, w - 1), (y + dy).clamp(0, h - 1));
                    let v = src[(ny * w + nx) as usize];
                    acc = if darkest { acc.min(v) } else { acc.max(v) };
                }
            }
            data.push(acc);
        }
    }
    Raster::new(gray.width(), gray.height(), Channels::Gray8, data).expect("same dimensions")
}

/// 3×3 closing of the dark foreground: grow dark regions (min filter),
/// then shrink them back (max filter). Output values are a subset of the
/// input values.
pub fn close_dark(gray: &Raster) -> Raster {
    let gray = gray.to_gray();
    window_extreme(&window_extreme(&gray, true), false)
}

/// Set pixels of `mask` with at least one 4-neighbour outside it (pixels
/// beyond the border count as outside).
pub fn boundary(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width(), mask.height());
    BinaryMask::from_fn(w, h, |x, y| {
        if !mask.get(x, y) {
            return false;
        }
        x == 0
            || y == 0
            || x + 1 == w
            || y + 1 == h
            || !mask.get(x - 1, y)
            || !mask.get(x + 1, y)
            || !mask.get(x, y - 1)
            || !mask.get(x, y + 1)
    })
}

/// Everything not reachable from the border through unset pixels
/// (4-connected flood fill of the outside).
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let mut outside = vec![false; w * h];
    let mut stack: Vec<usize> = Vec::new();
    let seed = |i: usize, outside: &mut Vec<bool>, stack: &mut Vec<usize>| {
        if !mask.get_index(i) && !outside[i] {
            outside[i] = true;
            stack.push(i);
        }
    };
    for x in 0..w {
        seed(x, &mut outside, &mut stack);
        seed((h - 1) * w + x, &mut outside, &mut stack);
    }
    for y in 0..h {
        seed(y * w, &mut outside, &mut stack);
        seed(y * w + w - 1, &mut outside, &mut stack);
    }
    while let Some(i) = stack.pop() {
        let (x, y) = (i % w, i / w);
        if x > 0 {
            seed(i - 1, &mut outside, &mut stack);
        }
        if x + 1 < w {
            seed(i + 1, &mut outside, &mut stack);
        }
        if y > 0 {
            seed(i - w, &mut outside, &mut stack);
        }
        if y + 1 < h {
            seed(i + w, &mut outside, &mut stack);
        }
    }
    let bits: Vec<bool> = outside.iter().map(|&o| !o).collect();
    BinaryMask::from_bools(w as u32, h as u32, &bits).expect("same size")
}

/// Renders a mask as black ink on white.
pub fn mask_to_gray(mask: &BinaryMask) -> Raster {
    let data = (0..mask.len())
        .map(|i| if mask.get_index(i) { 0 } else { 255 })
        .collect();
    Raster::new(mask.width(), mask.height(), Channels::Gray8, data).expect("mask is non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blur_keeps_constant_images() {
        let flat = Raster::filled(9, 7, Channels::Gray8, &[131]).unwrap();
        for sigma in [0.3, 1.0, 4.5, 20.0] {
            assert_eq!(gaussian_blur(&flat, sigma), flat);
        }
    }

    #[test]
    fn palette_spans_full_range() {
        assert_eq!(gray_palette(8), vec![0, 36, 73, 109, 146, 182, 219, 255]);
        assert_eq!(nearest_level(128, &gray_palette(8)), 146);
        assert_eq!(nearest_level(91, &[73, 109]), 73);
    }

    #[test]
    fn closing_fills_single_pixel_gap() {
        let mut data = vec![255u8; 25];
        for x in 0..5 {
            if x != 2 {
                data[10 + x] = 0;
            }
        }
        let line = Raster::gray(5, 5, data).unwrap();
        let closed = close_dark(&line);
        assert_eq!(closed.pixel(2, 2), &[0]);
        assert_eq!(closed.pixel(2, 0), &[255]);
    }

    #[test]
    fn boundary_and_fill_of_square() {
        let square = BinaryMask::from_fn(8, 8, |x, y| (2..6).contains(&x) && (2..6).contains(&y));
        let ring = boundary(&square);
        assert_eq!(ring.area(), 12);
        assert!(!ring.get(3, 3));
        assert_eq!(fill_holes(&ring), square);
    }
}
