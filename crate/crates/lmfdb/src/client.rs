use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use chrono::Utc;
use serde_json::Value;

use crate::cache::{Cache, CacheDocument, SCHEMA_VERSION};
use crate::record::{NewformOrbitRecord, SignSource};
use crate::{LmfdbError, Result};

pub const DEFAULT_BASE_URL: &str = "https://www.lmfdb.org";

const FIELDS: &str = "label,level,weight,dim,fricke_eigenval,atkin_lehner_eigenvals,is_twist_minimal,is_cm";
const MAX_PAGES: usize = 50;

macro_rules! fixture {
    ($n:literal, $k:literal) => {
        (
            $n,
            $k,
            include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/N", $n, "_k", $k, ".toml")),
        )
    };
}

static BUNDLED: &[(u64, u32, &str)] = &[
    fixture!(1, 12),
    fixture!(9, 10),
    fixture!(37, 2),
    fixture!(45, 4),
    fixture!(45, 6),
    fixture!(49, 14),
    fixture!(58, 2),
];

/// The committed fixture for `(level, weight)`, if there is one.
pub fn bundled_fixture(level: u64, weight: u32) -> Option<CacheDocument> {
    BUNDLED
        .iter()
        .find(|(n, k, _)| (*n, *k) == (level, weight))
        .map(|(_, _, text)| CacheDocument::from_toml(text).expect("bundled fixtures parse"))
}

#[derive(Debug, Clone)]
pub struct ClientConfig {
    pub base_url: String,
    /// Minimum spacing between consecutive HTTP requests.
    pub request_delay: Duration,
    pub timeout: Duration,
    /// Never touch the network.
    pub offline: bool,
    /// Consult the bundled fixtures when the cache misses.
    pub use_bundled: bool,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            base_url: DEFAULT_BASE_URL.to_owned(),
            request_delay: Duration::from_secs(2),
            timeout: Duration::from_secs(30),
            offline: false,
            use_bundled: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSource {
    Cache,
    Bundled,
    Network,
}

/// Records for one `(N, k)` and where they were found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    pub document: CacheDocument,
    pub source: DataSource,
}

/// Serial LMFDB client with an on-disk cache.
pub struct Client {
    config: ClientConfig,
    cache: Cache,
    agent: ureq::Agent,
    last_request: Mutex<Option<Instant>>,
}

impl Client {
    pub fn new(config: ClientConfig, cache: Cache) -> Client {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Client { config, cache, agent, last_request: Mutex::new(None) }
    }

    pub fn cache(&self) -> &Cache {
        &self.cache
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    /// All trivial-character newform orbits at `(level, weight)`.
    pub fn fetch_newform_orbits(&self, level: u64, weight: u32) -> Result<Fetched> {
        rootbias::check_weight(weight)?;
        if level == 0 {
            return Err(rootbias::Error::Zero.into());
        }
        if let Some(document) = self.cache.load(level, weight)? {
            return Ok(Fetched { document, source: DataSource::Cache });
        }
        if self.config.use_bundled {
            if let Some(document) = bundled_fixture(level, weight) {
                return Ok(Fetched { document, source: DataSource::Bundled });
            }
        }
        if self.config.offline {
            return Err(LmfdbError::OfflineMiss { level, weight });
        }
        let orbits = self.fetch_remote(level, weight)?;
        let document = CacheDocument {
            schema_version: SCHEMA_VERSION,
            level,
            weight,
            fetched_at: Utc::now(),
            source: self.config.base_url.clone(),
            orbits,
        };
        self.cache.store(&document)?;
        Ok(Fetched { document, source: DataSource::Network })
    }

    fn throttle(&self) {
        let mut last = self.last_request.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = *last {
            let wait = self.config.request_delay.saturating_sub(t.elapsed());
            if !wait.is_zero() {
                thread::sleep(wait);
            }
        }
        *last = Some(Instant::now());
    }

    fn get(&self, url: &str, level: u64, weight: u32) -> Result<String> {
        self.throttle();
        let network = |message: String| LmfdbError::Network { url: url.to_owned(), message };
        let mut response = self.agent.get(url).call().map_err(|e| network(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response.body_mut().read_to_string().map_err(|e| network(e.to_string()))?;
        match status {
            200..=299 => Ok(body),
            404 => Err(LmfdbError::NoData { level, weight }),
            _ => Err(network(format!("HTTP {status}"))),
        }
    }

    fn fetch_remote(&self, level: u64, weight: u32) -> Result<Vec<NewformOrbitRecord>> {
        let base = self.config.base_url.trim_end_matches('/');
        let mut url = format!(
            "{base}/api/mf_newforms/?level={level}&weight={weight}&char_order=1&_format=json&_fields={FIELDS}"
        );
        let mut orbits = Vec::new();
        for _ in 0..MAX_PAGES {
            let body = self.get(&url, level, weight)?;
            let (page, next) = parse_api_response(&body, level, weight)?;
            orbits.extend(page);
            match next {
                Some(n) if n.starts_with("http") => url = n,
                Some(n) => url = format!("{base}{n}"),
                None => break,
            }
        }
        if orbits.is_empty() && rootbias::dims::dim_sk_new(level, weight)? > 0 {
            return Err(LmfdbError::NoData { level, weight });
        }
        orbits.sort_by(|a, b| a.orbit_label.cmp(&b.orbit_label));
        Ok(orbits)
    }
}

fn parse_error(message: impl Into<String>, body: &str) -> LmfdbError {
    LmfdbError::Parse { message: message.into(), payload: body.to_owned() }
}

fn sign_of(v: &Value) -> Option<i8> {
    match v.as_i64()? {
        1 => Some(1),
        -1 => Some(-1),
        _ => None,
    }
}

/// Parses one page of an `/api/mf_newforms/` response into records and the
/// optional link to the next page.
pub fn parse_api_response(body: &str, level: u64, weight: u32) -> Result<(Vec<NewformOrbitRecord>, Option<String>)> {
    let root: Value = serde_json::from_str(body).map_err(|e| parse_error(e.to_string(), body))?;
    let data = root.get("data").and_then(Value::as_array).ok_or_else(|| parse_error("missing data array", body))?;
    let mut out = Vec::with_capacity(data.len());
    for item in data {
        let label = item
            .get("label")
            .and_then(Value::as_str)
            .ok_or_else(|| parse_error("record without label", body))?;
        let field_u64 = |name: &str, default: u64| match item.get(name) {
            None | Some(Value::Null) => Some(default),
            Some(v) => v.as_u64(),
        };
        let (Some(rec_level), Some(rec_weight), Some(dim)) =
            (field_u64("level", level), field_u64("weight", weight as u64), item.get("dim").and_then(Value::as_u64))
        else {
            return Err(parse_error(format!("{label}: bad level, weight or dim"), body));
        };
        if (rec_level, rec_weight) != (level, weight as u64) {
            return Err(parse_error(format!("{label}: record for another space"), body));
        }
        if dim == 0 {
            return Err(parse_error(format!("{label}: orbit dimension 0"), body));
        }
        let (fricke, sign_source) = match item.get("fricke_eigenval").and_then(sign_of) {
            Some(w) => (w, SignSource::FrickeEigenval),
            None => {
                let al = item
                    .get("atkin_lehner_eigenvals")
                    .and_then(Value::as_array)
                    .ok_or_else(|| parse_error(format!("{label}: no Fricke or Atkin-Lehner eigenvalues"), body))?;
                let mut w = 1i8;
                for pair in al {
                    let ev = pair.as_array().and_then(|p| p.get(1)).and_then(sign_of);
                    w *= ev.ok_or_else(|| parse_error(format!("{label}: bad Atkin-Lehner pair"), body))?;
                }
                (w, SignSource::AtkinLehnerEigenvals)
            }
        };
        out.push(NewformOrbitRecord {
            level,
            weight,
            orbit_label: label.to_owned(),
            orbit_dim: dim,
            root_number_sign: NewformOrbitRecord::root_number_from_fricke(weight, fricke),
            is_twist_minimal: item.get("is_twist_minimal").and_then(Value::as_bool),
            is_cm: item.get("is_cm").and_then(Value::as_bool),
            sign_source,
        });
    }
    let next = root.get("next").and_then(Value::as_str).filter(|s| !s.is_empty()).map(str::to_owned);
    Ok((out, next))
}
