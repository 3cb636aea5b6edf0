//! Content-addressed certificate cache under `$FUSLOC_CACHE_DIR`. A key is
//! the SHA-256 of everything a certificate depends on, so a hit returns the
//! bytes a recompute would produce.

use crate::input::CanonicalInput;
use sha2::{Digest, Sha256};
use std::path::PathBuf;

pub const CACHE_ENV: &str = "FUSLOC_CACHE_DIR";

pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn from_env() -> Cache {
        Cache { dir: std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()).map(PathBuf::from) }
    }

    pub fn key(&self, stage: &str, name: &str, input: &CanonicalInput, seed: Option<u64>) -> String {
        let material = serde_json::json!({
            "version": crate::VERSION,
            "stage": stage,
            "name": name,
            "input": input,
            "seed": seed,
        });
        digest(&serde_json::to_vec(&material).expect("serializable"))
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    /// Unreadable or non-JSON entries count as misses.
    pub fn get(&self, key: &str) -> Option<Vec<u8>> {
        let bytes = std::fs::read(self.path(key)?).ok()?;
        serde_json::from_slice::<serde_json::Value>(&bytes).ok()?;
        Some(bytes)
    }

    /// Best effort: a failed write only loses the cache entry. Entries are
    /// renamed into place so readers never see a partial file.
    pub fn put(&self, key: &str, bytes: &[u8]) {
        let (Some(dir), Some(path)) = (&self.dir, self.path(key)) else { return };
        if std::fs::create_dir_all(dir).is_err() {
            return;
        }
        let tmp = dir.join(format!("{key}.{}.tmp", std::process::id()));
        if std::fs::write(&tmp, bytes).is_ok() && std::fs::rename(&tmp, &path).is_err() {
            let _ = std::fs::remove_file(&tmp);
        }
    }
}
