use serde::{Deserialize, Serialize};

/// Which raw field the root number was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignSource {
    /// The Fricke eigenvalue itself.
    FrickeEigenval,
    /// Product of the Atkin-Lehner eigenvalues at every `p | N`.
    AtkinLehnerEigenvals,
}

impl SignSource {
    pub fn field_name(&self) -> &'static str {
        match self {
            SignSource::FrickeEigenval => "fricke_eigenval",
            SignSource::AtkinLehnerEigenvals => "atkin_lehner_eigenvals",
        }
    }
}

/// One Galois orbit of trivial-character newforms. Every member of the orbit
/// has the same root number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewformOrbitRecord {
    pub level: u64,
    pub weight: u32,
    pub orbit_label: String,
    pub orbit_dim: u64,
    /// `(-1)^{k/2}` times the Fricke eigenvalue.
    pub root_number_sign: i8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_twist_minimal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_cm: Option<bool>,
    pub sign_source: SignSource,
}

impl NewformOrbitRecord {
    /// Root number from a Fricke eigenvalue `w = ±1`.
    pub fn root_number_from_fricke(weight: u32, fricke: i8) -> i8 {
        if (weight / 2).is_multiple_of(2) {
            fricke
        } else {
            -fricke
        }
    }

    /// `orbit_dim · root_number_sign`.
    pub fn signed_dim(&self) -> i64 {
        self.orbit_dim as i64 * i64::from(self.root_number_sign)
    }
}
