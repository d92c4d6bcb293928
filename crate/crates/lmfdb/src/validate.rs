use chrono::{DateTime, Utc};

use crate::client::{Client, DataSource};
use crate::Result;

/// Computed `Δ(N,k)` against the signed orbit dimensions from the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub n: u64,
    pub k: u32,
    pub computed_delta: i64,
    /// `Σ orbit_dim · root_number_sign` over all orbits.
    pub external_sum: i64,
    pub orbit_count: usize,
    pub computed_dim: u64,
    /// `Σ orbit_dim`.
    pub external_dim: u64,
    /// `computed_delta == external_sum`.
    pub matched: bool,
    pub fetched_at: DateTime<Utc>,
    pub source: DataSource,
}

impl ValidationReport {
    pub fn dims_match(&self) -> bool {
        self.computed_dim == self.external_dim
    }
}

pub fn validate_delta(client: &Client, n: u64, k: u32) -> Result<ValidationReport> {
    let computed_delta = rootbias::bias::delta(n, k)?;
    let computed_dim = rootbias::dims::dim_sk_new(n, k)?;
    let fetched = client.fetch_newform_orbits(n, k)?;
    let orbits = &fetched.document.orbits;
    let external_sum = orbits.iter().map(|o| o.signed_dim()).sum();
    Ok(ValidationReport {
        n,
        k,
        computed_delta,
        external_sum,
        orbit_count: orbits.len(),
        computed_dim,
        external_dim: orbits.iter().map(|o| o.orbit_dim).sum(),
        matched: computed_delta == external_sum,
        fetched_at: fetched.document.fetched_at,
        source: fetched.source,
    })
}

/// Root numbers of twist-minimal orbits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalReport {
    pub n: u64,
    pub k: u32,
    /// `Σ orbit_dim · root_number_sign` over twist-minimal orbits.
    pub minimal_sum: i64,
    pub minimal_orbits: usize,
    /// Whether the local criterion at some `p² ∥ N` forces the sum to vanish.
    pub balance_predicted: bool,
    /// False only when balance is predicted and `minimal_sum ≠ 0`.
    pub consistent: bool,
    pub fetched_at: DateTime<Utc>,
    pub source: DataSource,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MinimalOutcome {
    Report(MinimalReport),
    /// Some orbits carry no minimality flag, so no sum is reported.
    InsufficientData { n: u64, k: u32, unflagged: Vec<String> },
}

pub fn validate_minimal(client: &Client, n: u64, k: u32) -> Result<MinimalOutcome> {
    rootbias::check_weight(k)?;
    let fetched = client.fetch_newform_orbits(n, k)?;
    let orbits = &fetched.document.orbits;
    let unflagged: Vec<String> =
        orbits.iter().filter(|o| o.is_twist_minimal.is_none()).map(|o| o.orbit_label.clone()).collect();
    if !unflagged.is_empty() {
        return Ok(MinimalOutcome::InsufficientData { n, k, unflagged });
    }
    let minimal: Vec<_> = orbits.iter().filter(|o| o.is_twist_minimal == Some(true)).collect();
    let minimal_sum = minimal.iter().map(|o| o.signed_dim()).sum();
    let balance_predicted = rootbias::bias::minimal_balance(n);
    Ok(MinimalOutcome::Report(MinimalReport {
        n,
        k,
        minimal_sum,
        minimal_orbits: minimal.len(),
        balance_predicted,
        consistent: !balance_predicted || minimal_sum == 0,
        fetched_at: fetched.document.fetched_at,
        source: fetched.source,
    }))
}
