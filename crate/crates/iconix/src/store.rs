//! Append-only, content-addressed artifact store.
//!
//! Artifacts live at `<root>/artifacts/<sha256>.<ext>` and are referred to
//! by that relative path. Writes go through a temporary file and a rename,
//! so readers never see partial files and concurrent writers of identical
//! bytes converge on one file. Reads re-hash the bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use iconix_core::{BinaryMask, Raster};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::codec::{decode_png, encode_png, CodecError};

pub const ARTIFACT_DIR: &str = "artifacts";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("artifact `{0}` not found")]
    NotFound(String),
    #[error("`{0}` is not an artifact reference")]
    BadRef(String),
    #[error("artifact `{reference}` does not match its checksum")]
    Corrupt { reference: String },
    #[error("artifact `{reference}`: {source}")]
    Decode { reference: String, source: CodecError },
}

impl StoreError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        StoreError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| StoreError::io(dir, e))?;
    let tmp = dir.join(format!(
        ".tmp-{}-{}",
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(StoreError::io(path, e));
    }
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("snapshot types serialize");
    out.push(b'\n');
    out
}

#[derive(Clone, Debug)]
pub struct ArtifactStore {
    root: PathBuf,
}

impl ArtifactStore {
    /// A store rooted at `root`; directories are created on first write.
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn parse_ref<'a>(&self, reference: &'a str) -> Result<(&'a str, PathBuf), StoreError> {
        let bad = || StoreError::BadRef(reference.to_string());
        let name = reference.strip_prefix("artifacts/").unwrap_or(reference);
        let (hash, ext) = name.split_once('.').ok_or_else(bad)?;
        let valid_hash = hash.len() == 64 && hash.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase());
        let valid_ext = !ext.is_empty() && ext.bytes().all(|b| b.is_ascii_alphanumeric());
        if !valid_hash || !valid_ext {
            return Err(bad());
        }
        Ok((hash, self.root.join(ARTIFACT_DIR).join(name)))
    }

    /// Stores `bytes` and returns `artifacts/<sha256>.<ext>`. Storing the
    /// same bytes again returns the same reference without rewriting.
    pub fn put(&self, bytes: &[u8], ext: &str) -> Result<String, StoreError> {
        let name = format!("{}.{ext}", sha256_hex(bytes));
        let path = self.root.join(ARTIFACT_DIR).join(&name);
        if !path.exists() {
            write_atomic(&path, bytes)?;
        }
        Ok(format!("{ARTIFACT_DIR}/{name}"))
    }

    pub fn put_png(&self, img: &Raster) -> Result<String, StoreError> {
        self.put(&encode_png(img), "png")
    }

    /// Masks are stored as gray PNGs with set pixels at 255.
    pub fn put_mask(&self, mask: &BinaryMask) -> Result<String, StoreError> {
        self.put_png(&crate::codec::mask_to_raster(mask))
    }

    pub fn put_json<T: Serialize + ?Sized>(&self, value: &T) -> Result<String, StoreError> {
        self.put(&to_json_bytes(value), "json")
    }

    /// Reads and verifies an artifact. Accepts a full reference or just
    /// `<sha256>.<ext>`.
    pub fn get(&self, reference: &str) -> Result<Vec<u8>, StoreError> {
        let (hash, path) = self.parse_ref(reference)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(StoreError::NotFound(reference.to_string()))
            }
            Err(e) => return Err(StoreError::io(&path, e)),
        };
        if sha256_hex(&bytes) != hash {
            return Err(StoreError::Corrupt {
                reference: reference.to_string(),
            });
        }
        Ok(bytes)
    }

    pub fn get_png(&self, reference: &str) -> Result<Raster, StoreError> {
        decode_png(&self.get(reference)?).map_err(|source| StoreError::Decode {
            reference: reference.to_string(),
            source,
        })
    }

    pub fn get_mask(&self, reference: &str) -> Result<BinaryMask, StoreError> {
        let img = self.get_png(reference)?;
        crate::codec::mask_from_raster(&img).map_err(|source| StoreError::Decode {
            reference: reference.to_string(),
            source,
        })
    }

    pub fn get_json<T: serde::de::DeserializeOwned>(&self, reference: &str) -> Result<T, StoreError> {
        let bytes = self.get(reference)?;
        serde_json::from_slice(&bytes).map_err(|_| StoreError::Corrupt {
            reference: reference.to_string(),
        })
    }

    /// Whether `reference` exists and verifies.
    pub fn verify(&self, reference: &str) -> Result<(), StoreError> {
        self.get(reference).map(drop)
    }
}
