//! Newform orbit data from the LMFDB: fetching, an on-disk cache, and
//! validation of the computed root number bias against it.
//!
//! Lookups go through three layers in order: the cache directory, the
//! fixtures bundled with this crate, and the network. Anything fetched from
//! the network is written to the cache before it is returned.

mod cache;
mod client;
mod record;
mod validate;

pub use cache::{default_cache_dir, Cache, CacheDocument, CACHE_DIR_ENV, SCHEMA_VERSION};
pub use client::{bundled_fixture, parse_api_response, Client, ClientConfig, DataSource, Fetched, DEFAULT_BASE_URL};
pub use record::{NewformOrbitRecord, SignSource};
pub use validate::{validate_delta, validate_minimal, MinimalOutcome, MinimalReport, ValidationReport};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LmfdbError {
    /// Transport failure or server error; retrying later may succeed.
    #[error("network error fetching {url}: {message}")]
    Network { url: String, message: String },
    #[error("no newform data for level {level}, weight {weight}")]
    NoData { level: u64, weight: u32 },
    #[error("malformed response ({message}); payload: {payload}")]
    Parse { message: String, payload: String },
    #[error("cache file {path}: {message}")]
    Cache { path: PathBuf, message: String },
    #[error("offline and nothing cached for level {level}, weight {weight}")]
    OfflineMiss { level: u64, weight: u32 },
    #[error(transparent)]
    Core(#[from] rootbias::Error),
}

impl LmfdbError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, LmfdbError::Network { .. })
    }
}

pub type Result<T, E = LmfdbError> = std::result::Result<T, E>;
