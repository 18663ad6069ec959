//! Content-addressed on-disk cache of stage results.
//!
//! Entries live at `<root>/<stage>/v<version>/<sha256>.json`, the hash taken over the
//! canonical JSON of everything the stage depends on. Bumping a stage version orphans
//! its old entries.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const CACHE_ENV: &str = "WAVEMIX_CACHE_DIR";
pub const FORMAT: &str = "wavemix-cache";

/// SHA-256 of the JSON serialization, hex encoded.
pub fn content_hash<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn bytes_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CacheStatus {
    Hit,
    Miss,
    Disabled,
    /// Stage results are cheap and never cached.
    Uncached,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub format: String,
    pub stage: String,
    pub version: u32,
    pub key: String,
    pub payload: T,
}

#[derive(Debug, Clone, Default)]
pub struct Cache {
    root: Option<PathBuf>,
}

impl Cache {
    pub fn at(root: impl Into<PathBuf>) -> Self {
        Cache { root: Some(root.into()) }
    }

    pub fn disabled() -> Self {
        Cache { root: None }
    }

    /// Cache rooted at `$WAVEMIX_CACHE_DIR`, or disabled when it is unset or empty.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(v) if !v.is_empty() => Cache::at(v),
            _ => Cache::disabled(),
        }
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn path(&self, stage: &str, version: u32, key: &str) -> Option<PathBuf> {
        self.root.as_ref().map(|r| r.join(stage).join(format!("v{version}")).join(format!("{key}.json")))
    }

    /// A stored payload, or None on a miss. Unreadable or mismatched entries count as misses.
    pub fn load<T: DeserializeOwned>(&self, stage: &str, version: u32, key: &str) -> Option<T> {
        let path = self.path(stage, version, key)?;
        let text = fs::read(&path).ok()?;
        let env: Envelope<T> = serde_json::from_slice(&text).ok()?;
        (env.format == FORMAT && env.stage == stage && env.version == version && env.key == key).then_some(env.payload)
    }

    /// Write through a temporary file and rename, so concurrent readers never see a partial entry.
    pub fn store<T: Serialize>(&self, stage: &str, version: u32, key: &str, payload: &T) -> Result<()> {
        let Some(path) = self.path(stage, version, key) else { return Ok(()) };
        let dir = path.parent().expect("entry path has a parent");
        fs::create_dir_all(dir)?;
        let env = Envelope { format: FORMAT.into(), stage: stage.into(), version, key: key.into(), payload };
        let tmp = dir.join(format!(".{key}.{}.tmp", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(&env)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Load the entry for `inputs`, or compute and store it.
    pub fn get_or_compute<K, T, F>(&self, stage: &str, version: u32, inputs: &K, compute: F) -> Result<(T, CacheStatus, String)>
    where
        K: Serialize + ?Sized,
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<T>,
    {
        let key = content_hash(&(stage, version, inputs))?;
        if self.root.is_none() {
            return Ok((compute()?, CacheStatus::Disabled, key));
        }
        if let Some(v) = self.load(stage, version, &key) {
            return Ok((v, CacheStatus::Hit, key));
        }
        let v = compute()?;
        self.store(stage, version, &key, &v)?;
        Ok((v, CacheStatus::Miss, key))
    }
}
