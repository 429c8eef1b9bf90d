//! Content-addressed store for round error distributions.
//!
//! A file is named by the SHA-256 of its key (noise point, stabilizer type,
//! code version) and holds the key, the distribution document and the
//! SHA-256 of that document.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spinnet::{NoiseParams, RoundErrorDistribution, StabilizerType};
use std::path::{Path, PathBuf};

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "SPINNET_CACHE_DIR";
const FORMAT: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache I/O on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cache file {0} is unreadable: {1}")]
    Corrupt(PathBuf, String),
    #[error("checksum failure in cache file {0}")]
    Checksum(PathBuf),
    #[error("cache file {0} holds a different key; refusing to use it")]
    Collision(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheKey {
    pub noise: NoiseParams,
    pub stabilizer_type: StabilizerType,
    pub code_version: String,
}

impl CacheKey {
    pub fn new(noise: &NoiseParams, stabilizer_type: StabilizerType) -> Self {
        CacheKey { noise: *noise, stabilizer_type, code_version: format!("spinnet-{}/cache-{FORMAT}", spinnet::VERSION) }
    }

    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("key serializes").as_bytes())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    key: CacheKey,
    sha256: String,
    distribution: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    /// Directory from `SPINNET_CACHE_DIR`, else `fallback`.
    pub fn from_env(fallback: &Path) -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Cache::new(d),
            _ => Cache::new(fallback),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.digest()))
    }

    pub fn store(&self, key: &CacheKey, dist: &RoundErrorDistribution) -> Result<PathBuf, CacheError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CacheError::Io { path, source }
        };
        std::fs::create_dir_all(&self.dir).map_err(io(&self.dir))?;
        let doc = dist.to_json();
        let entry = Entry { key: key.clone(), sha256: sha256_hex(doc.as_bytes()), distribution: doc };
        let path = self.path_for(key);
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_string_pretty(&entry).expect("entry serializes")).map_err(io(&tmp))?;
        std::fs::rename(&tmp, &path).map_err(io(&path))?;
        Ok(path)
    }

    /// `Ok(None)` when no file exists for the key.
    pub fn load(&self, key: &CacheKey) -> Result<Option<RoundErrorDistribution>, CacheError> {
        let path = self.path_for(key);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(source) => return Err(CacheError::Io { path, source }),
        };
        let entry: Entry = serde_json::from_str(&text).map_err(|e| CacheError::Corrupt(path.clone(), e.to_string()))?;
        if entry.key != *key {
            return Err(CacheError::Collision(path));
        }
        if sha256_hex(entry.distribution.as_bytes()) != entry.sha256 {
            return Err(CacheError::Checksum(path));
        }
        let dist =
            RoundErrorDistribution::from_json(&entry.distribution).map_err(|e| CacheError::Corrupt(path.clone(), e.to_string()))?;
        if dist.stabilizer_type() != key.stabilizer_type {
            return Err(CacheError::Collision(path));
        }
        Ok(Some(dist))
    }

    /// Loads the distribution for `key`, computing and storing it on a miss.
    /// The flag is true on a hit.
    pub fn get_or_compute(
        &self,
        key: &CacheKey,
        compute: impl FnOnce() -> anyhow::Result<RoundErrorDistribution>,
    ) -> anyhow::Result<(RoundErrorDistribution, bool)> {
        if let Some(d) = self.load(key)? {
            return Ok((d, true));
        }
        let d = compute()?;
        self.store(key, &d)?;
        Ok((d, false))
    }
}
