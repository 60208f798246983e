//! Small helpers shared across modules: digests, canonical JSON, path resolution.

pub mod yaml;

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Compact JSON with object keys in sorted order.
///
/// `serde_json::Map` is a `BTreeMap` in this build, so plain compact output is canonical.
pub fn canonical_json(value: &serde_json::Value) -> String {
    serde_json::to_string(value).expect("JSON values always serialize")
}

pub fn canonical_digest(value: &serde_json::Value) -> String {
    sha256_hex(canonical_json(value).as_bytes())
}

/// Resolves `path` against the directory holding `base_file`.
pub fn resolve_relative(base_file: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base_file.parent().unwrap_or_else(|| Path::new(".")).join(path)
    }
}

pub fn read_text(path: &Path) -> crate::Result<String> {
    std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> crate::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| crate::Error::io(parent, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| crate::Error::io(path, e))
}
