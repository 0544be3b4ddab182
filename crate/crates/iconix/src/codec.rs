//! PNG, base64 and run-length mask encodings.

use std::io::Cursor;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use iconix_core::{BinaryMask, Channels, ImagingError, Raster};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CodecError {
    #[error("png: {0}")]
    Png(String),
    #[error("base64: {0}")]
    Base64(#[from] base64::DecodeError),
    #[error("invalid {width}x{height} mask encoding")]
    Mask { width: u32, height: u32 },
    #[error(transparent)]
    Imaging(#[from] ImagingError),
}

/// 8-bit PNG: grayscale for gray rasters, RGBA otherwise.
pub fn encode_png(img: &Raster) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width(), img.height());
        enc.set_color(match img.channels() {
            Channels::Gray8 => png::ColorType::Grayscale,
            Channels::Rgba8 => png::ColorType::Rgba,
        });
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().expect("writing to a Vec cannot fail");
        writer.write_image_data(img.data()).expect("buffer length matches header");
    }
    out
}

/// Decodes any PNG to a gray raster (gray input) or an RGBA raster.
pub fn decode_png(bytes: &[u8]) -> Result<Raster, CodecError> {
    let png_err = |e: png::DecodingError| CodecError::Png(e.to_string());
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| CodecError::Png("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    buf.truncate(info.buffer_size());
    let (w, h) = (info.width, info.height);
    let (channels, data) = match info.color_type {
        png::ColorType::Grayscale => (Channels::Gray8, buf),
        png::ColorType::GrayscaleAlpha => (
            Channels::Rgba8,
            buf.chunks_exact(2).flat_map(|p| [p[0], p[0], p[0], p[1]]).collect(),
        ),
        png::ColorType::Rgb => (
            Channels::Rgba8,
            buf.chunks_exact(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect(),
        ),
        png::ColorType::Rgba => (Channels::Rgba8, buf),
        png::ColorType::Indexed => return Err(CodecError::Png("palette was not expanded".into())),
    };
    Ok(Raster::new(w, h, channels, data)?)
}

pub fn png_base64(img: &Raster) -> String {
    STANDARD.encode(encode_png(img))
}

pub fn raster_from_base64(text: &str) -> Result<Raster, CodecError> {
    decode_png(&STANDARD.decode(text.trim())?)
}

/// Row-major run lengths alternating unset/set, starting with unset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskRle {
    pub width: u32,
    pub height: u32,
    pub runs: Vec<u32>,
}

impl From<&BinaryMask> for MaskRle {
    fn from(m: &BinaryMask) -> Self {
        Self {
            width: m.width(),
            height: m.height(),
            runs: m.runs(),
        }
    }
}

impl TryFrom<&MaskRle> for BinaryMask {
    type Error = CodecError;

    fn try_from(r: &MaskRle) -> Result<Self, CodecError> {
        BinaryMask::from_runs(r.width, r.height, &r.runs).ok_or(CodecError::Mask {
            width: r.width,
            height: r.height,
        })
    }
}

/// Gray raster with set pixels at 255 and the rest at 0.
pub fn mask_to_raster(mask: &BinaryMask) -> Raster {
    let data = (0..mask.len()).map(|i| if mask.get_index(i) { 255 } else { 0 }).collect();
    Raster::gray(mask.width(), mask.height(), data).expect("mask length matches its dimensions")
}

/// Inverse of [`mask_to_raster`]; only pure 0/255 gray images are accepted.
pub fn mask_from_raster(img: &Raster) -> Result<BinaryMask, CodecError> {
    let bad = || CodecError::Mask {
        width: img.width(),
        height: img.height(),
    };
    if img.channels() != Channels::Gray8 || img.data().iter().any(|&v| v != 0 && v != 255) {
        return Err(bad());
    }
    let bits: Vec<bool> = img.data().iter().map(|&v| v == 255).collect();
    BinaryMask::from_bools(img.width(), img.height(), &bits).ok_or_else(bad)
}
