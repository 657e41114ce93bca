//! Report files. Names carry a hash of the resolved configuration, so runs
//! with different settings never collide and a rerun reproduces the same
//! bytes. Existing files are never overwritten with different content.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub struct OutDir {
    pub dir: PathBuf,
    pub tag: String,
}

/// First 16 hex digits of SHA-256 over the canonical JSON of `value`.
pub fn content_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    Sha256::digest(&bytes).iter().take(8).map(|b| format!("{b:02x}")).collect()
}

impl OutDir {
    pub fn new(dir: PathBuf, command: &str, hash: &str) -> anyhow::Result<Self> {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutDir { dir, tag: format!("{command}-{hash}") })
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.tag))
    }

    pub fn write_bytes(&self, suffix: &str, bytes: &[u8]) -> anyhow::Result<PathBuf> {
        let path = self.path(suffix);
        put(&path, bytes)?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, suffix: &str, value: &T) -> anyhow::Result<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(suffix, &bytes)
    }
}

fn put(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Ok(old) = fs::read(path) {
        if old == bytes {
            return Ok(());
        }
        bail!("{} exists with different content; refusing to overwrite", path.display());
    }
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
