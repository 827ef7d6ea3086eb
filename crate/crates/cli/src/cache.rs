//! Content-addressed JSON cache. Keys are SHA-256 digests of the canonical JSON of the
//! inputs; writes go to a temporary file in the cache directory and are renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(parts: &impl Serialize) -> Result<String, CliError> {
        let digest = Sha256::digest(serde_json::to_vec(parts)?);
        let mut hex = String::with_capacity(64);
        for b in digest {
            let _ = write!(hex, "{b:02x}");
        }
        Ok(hex)
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// `None` when the entry is absent or unreadable as `T`.
    pub fn load<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, CliError> {
        match std::fs::read(self.path(key)) {
            Ok(bytes) => Ok(serde_json::from_slice(&bytes).ok()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn store<T: Serialize>(&self, key: &str, value: &T) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, value)?;
        tmp.flush()?;
        tmp.persist(self.path(key)).map_err(|e| CliError::Io(e.error))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_keys() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().join("nested"));
        let key = Cache::key(&("slopes", 3, [10, 20])).unwrap();
        assert_eq!(key.len(), 64);
        assert_ne!(key, Cache::key(&("slopes", 5, [10, 20])).unwrap());
        assert_eq!(cache.load::<Vec<u32>>(&key).unwrap(), None);
        cache.store(&key, &vec![1u32, 2, 3]).unwrap();
        assert_eq!(cache.load::<Vec<u32>>(&key).unwrap(), Some(vec![1, 2, 3]));
        assert_eq!(cache.load::<String>(&key).unwrap(), None);
    }
}
