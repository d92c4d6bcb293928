use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::record::NewformOrbitRecord;
use crate::{LmfdbError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Overrides the default cache directory.
pub const CACHE_DIR_ENV: &str = "ROOTBIAS_CACHE_DIR";

/// One cached `(N, k)` lookup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheDocument {
    pub schema_version: u32,
    pub level: u64,
    pub weight: u32,
    pub fetched_at: DateTime<Utc>,
    /// Where the records came from.
    pub source: String,
    #[serde(default)]
    pub orbits: Vec<NewformOrbitRecord>,
}

impl CacheDocument {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| LmfdbError::Parse { message: e.to_string(), payload: format!("{self:?}") })
    }

    pub fn from_toml(text: &str) -> Result<CacheDocument> {
        let doc: CacheDocument =
            toml::from_str(text).map_err(|e| LmfdbError::Parse { message: e.to_string(), payload: text.to_owned() })?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(LmfdbError::Parse {
                message: format!("schema version {} (expected {SCHEMA_VERSION})", doc.schema_version),
                payload: text.to_owned(),
            });
        }
        Ok(doc)
    }
}

/// `$ROOTBIAS_CACHE_DIR`, else `$XDG_CACHE_HOME/rootbias/lmfdb`, else
/// `$HOME/.cache/rootbias/lmfdb`, else `./.rootbias-cache`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_DIR_ENV) {
        return PathBuf::from(dir);
    }
    if let Some(xdg) = std::env::var_os("XDG_CACHE_HOME") {
        return PathBuf::from(xdg).join("rootbias").join("lmfdb");
    }
    if let Some(home) = std::env::var_os("HOME") {
        return PathBuf::from(home).join(".cache").join("rootbias").join("lmfdb");
    }
    PathBuf::from(".rootbias-cache")
}

/// A directory of `N{level}_k{weight}.toml` documents.
#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Cache {
        Cache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, level: u64, weight: u32) -> PathBuf {
        self.dir.join(format!("N{level}_k{weight}.toml"))
    }

    pub fn load(&self, level: u64, weight: u32) -> Result<Option<CacheDocument>> {
        let path = self.path_for(level, weight);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(LmfdbError::Cache { path, message: e.to_string() }),
        };
        let doc = CacheDocument::from_toml(&text)?;
        if (doc.level, doc.weight) != (level, weight) {
            return Err(LmfdbError::Cache {
                path,
                message: format!("holds level {}, weight {}", doc.level, doc.weight),
            });
        }
        Ok(Some(doc))
    }

    /// Writes through a temporary file in the same directory and renames it
    /// into place, so readers never see a partial document.
    pub fn store(&self, doc: &CacheDocument) -> Result<PathBuf> {
        let path = self.path_for(doc.level, doc.weight);
        let io_err = |e: std::io::Error| LmfdbError::Cache { path: path.clone(), message: e.to_string() };
        fs::create_dir_all(&self.dir).map_err(io_err)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io_err)?;
        tmp.write_all(doc.to_toml()?.as_bytes()).map_err(io_err)?;
        tmp.as_file().sync_all().map_err(io_err)?;
        tmp.persist(&path).map_err(|e| io_err(e.error))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::SignSource;

    fn doc() -> CacheDocument {
        CacheDocument {
            schema_version: SCHEMA_VERSION,
            level: 11,
            weight: 2,
            fetched_at: "2026-01-02T03:04:05Z".parse().unwrap(),
            source: "test".into(),
            orbits: vec![NewformOrbitRecord {
                level: 11,
                weight: 2,
                orbit_label: "11.2.a.a".into(),
                orbit_dim: 1,
                root_number_sign: 1,
                is_twist_minimal: Some(true),
                is_cm: None,
                sign_source: SignSource::FrickeEigenval,
            }],
        }
    }

    #[test]
    fn store_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().join("nested"));
        assert_eq!(cache.load(11, 2).unwrap(), None);
        let path = cache.store(&doc()).unwrap();
        assert!(path.ends_with("N11_k2.toml"));
        assert_eq!(cache.load(11, 2).unwrap(), Some(doc()));
        // Only the final document remains in the directory.
        assert_eq!(fs::read_dir(cache.dir()).unwrap().count(), 1);
    }

    #[test]
    fn rejects_other_schema() {
        let text = doc().to_toml().unwrap().replace("schema_version = 1", "schema_version = 99");
        assert!(matches!(CacheDocument::from_toml(&text), Err(LmfdbError::Parse { .. })));
    }

    #[test]
    fn rejects_misfiled_document() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        fs::write(cache.path_for(13, 2), doc().to_toml().unwrap()).unwrap();
        assert!(matches!(cache.load(13, 2), Err(LmfdbError::Cache { .. })));
    }
}
