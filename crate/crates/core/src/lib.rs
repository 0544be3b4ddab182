//! Pipeline core for turning one input concept into a dual-axis icon grid.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! outside world (PNG files, HTTP model servers, the session store) lives in
//! the `iconix` companion crate; here we keep the pure stages:
//!
//! - [`imaging`]: rasters, masks, connected components, compositing and the
//!   reference perceptual distance.
//! - [`ideation`]: candidate filtering, thresholding, ranking and the
//!   multi-round expansion loop.
//! - [`scaffold`]: relation taxonomy, scaffold construction and the chained
//!   three-view prompt plan.
//! - [`backend`]: traits for every model-backed step, plus deterministic mock
//!   and reference implementations.
//! - [`simplification`]: the progressive simplification loop and its
//!   plateau + single-component stopping rule.
//! - [`selection`]: k-means, representative frames and the PCA scatter.
//! - [`layering`]: area-ordered translucent mask layering.
//! - [`grid`]: dual-axis grid assembly, restyling and sprite-sheet export.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod backend;
pub mod config;
pub mod grid;
pub mod ideation;
pub mod imaging;
pub mod layering;
pub mod pipeline;
pub mod scaffold;
pub mod selection;
pub mod simplification;

pub use config::{ConfigError, PipelineConfig};
pub use imaging::{BinaryMask, Channels, Connectivity, ImagingError, Raster};
