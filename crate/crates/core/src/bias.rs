//! Root number bias `Δ(N,k) = dim S_k^new(N)^+ - dim S_k^new(N)^-`.
//!
//! A newform's root number is `(-1)^{k/2}` times its Fricke eigenvalue, so
//! `Δ(N,k) = (-1)^{k/2} tr W_N^new`. This module exposes `Δ`, the refined
//! dimensions, the exact list of levels and weights where `Δ` vanishes, the
//! large-weight sign on cubefree squares, and the variant `Δ'` that drops
//! twists of level one forms.

use std::fmt;

use rayon::prelude::*;

use crate::arith::{decompose_level, factor, kronecker, Factorization, LevelDecomposition, Rational};
use crate::classnum::{h_prime, Discriminant};
use crate::dims::{dim_sk, dim_sk_new};
use crate::error::{check_weight, Error, Result};
use crate::trace::{beta, c_coeff, field_discriminant, level_case, sign_k, trace_new_closed, CaseTag};

/// `Δ(N,k)`.
pub fn delta(n: u64, k: u32) -> Result<i64> {
    Ok(sign_k(k) * trace_new_closed(n, k)?)
}

/// `(dim S_k^new(N)^+, dim S_k^new(N)^-)`.
pub fn refined_dims(n: u64, k: u32) -> Result<(u64, u64)> {
    let d = delta(n, k)?;
    let dim = dim_sk_new(n, k)? as i64;
    debug_assert!((dim + d) % 2 == 0 && d.abs() <= dim);
    Ok((((dim + d) / 2) as u64, ((dim - d) / 2) as u64))
}

/// The reason `Δ(N,k) = 0`, one variant per exact vanishing condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ZeroClass {
    /// Generic level, `k = 2`, empty newspace.
    K2DimZero,
    /// `k = 2` and `N ∈ {37, 58}`.
    K2_3758,
    /// `2 ∥ N2` and `N1 ≡ 7 mod 8`, where `c(-D, N2) = 0`.
    SevenMod8TwoExactly,
    /// `N = 16`, `k ≡ 2 mod 4`.
    Level16K2mod4,
    /// `N ∈ {8, 18}` with `k ≡ 0, 2 mod 8`; `N ∈ {2, 72}` with
    /// `k ≡ 4, 6 mod 8`; or `(N,k) = (2,2)`.
    Level2Family,
    /// `N ∈ {3, 108}` with `k ≡ 4, 10 mod 12`; `N = 12` with
    /// `k ≢ 4, 10 mod 12`; or `(N,k) = (3,2)`.
    Level3Family,
    /// `N = M²` with `M` squarefree, where the quadratic main term
    /// `(c(-4,M) ∓ μ(M))/4` exactly cancels the level one contribution.
    SquareLevelCancellation,
}

impl ZeroClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZeroClass::K2DimZero => "K2_DimZero",
            ZeroClass::K2_3758 => "K2_3758",
            ZeroClass::SevenMod8TwoExactly => "SevenMod8_TwoExactly",
            ZeroClass::Level16K2mod4 => "Level16_K2mod4",
            ZeroClass::Level2Family => "Level2Family",
            ZeroClass::Level3Family => "Level3Family",
            ZeroClass::SquareLevelCancellation => "SquareLevel_Cancellation",
        }
    }
}

impl fmt::Display for ZeroClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Signed level one contribution on `N = M²`: `⌊k/12⌋ - κ` for odd `M`
/// (with `dim S_2(1) = 0` restored when `M = 1`), `⌊k/12⌋ + κ` for even `M`.
fn square_level_one_term(m: &Factorization, k: u32) -> i64 {
    let floor = (k / 12) as i64;
    if m.value() % 2 == 1 {
        let kappa = i64::from(k % 12 == 2);
        floor - kappa + i64::from(k == 2 && m.value() == 1)
    } else {
        floor + i64::from(matches!(k % 12, 6 | 10))
    }
}

/// The case-(2) vanishing condition `c(-4,M) ∓ μ(M) = -4 (-1)^{k/2} μ(M) L`
/// with `L` the level one term, written without reference to the trace.
fn square_cancels(m: &Factorization, k: u32) -> bool {
    let mu = m.mobius();
    let c = c_coeff(-4, m.value()).expect("-4 is fundamental") as i64;
    let main = if m.value() % 2 == 1 { c - mu } else { c + mu };
    main == -4 * sign_k(k) * mu * square_level_one_term(m, k)
}

/// Returns the condition under which `Δ(N,k) = 0`, or `None` when `Δ ≠ 0`.
pub fn classify_zero(n: u64, k: u32) -> Result<Option<ZeroClass>> {
    check_weight(k)?;
    let dec = decompose_level(n)?;
    let k8 = k % 8;
    let k12 = k % 12;
    let class = match level_case(&dec) {
        CaseTag::Generic => {
            if k == 2 && dim_sk_new(n, 2)? == 0 {
                Some(ZeroClass::K2DimZero)
            } else if k == 2 && matches!(n, 37 | 58) {
                Some(ZeroClass::K2_3758)
            } else if dec.n2 % 4 == 2 && dec.n1 % 8 == 7 {
                Some(ZeroClass::SevenMod8TwoExactly)
            } else {
                None
            }
        }
        CaseTag::SquareOddRoot | CaseTag::SquareEvenRoot => {
            square_cancels(&dec.n2_factorization(), k).then_some(ZeroClass::SquareLevelCancellation)
        }
        CaseTag::SquareTwiceEven => (n == 16 && k % 4 == 2).then_some(ZeroClass::Level16K2mod4),
        CaseTag::TwiceSquare => {
            let hit = (matches!(n, 8 | 18) && matches!(k8, 0 | 2))
                || (matches!(n, 2 | 72) && matches!(k8, 4 | 6))
                || (n, k) == (2, 2);
            hit.then_some(ZeroClass::Level2Family)
        }
        CaseTag::ThriceSquare => {
            let hit = (matches!(n, 3 | 108) && matches!(k12, 4 | 10))
                || (n == 12 && !matches!(k12, 4 | 10))
                || (n, k) == (3, 2);
            hit.then_some(ZeroClass::Level3Family)
        }
        CaseTag::SmallLevel => unreachable!(),
    };
    Ok(class)
}

/// True for `N = M²` with `M` squarefree (including `N = 1`).
pub fn is_cubefree_square(n: u64) -> bool {
    match decompose_level(n) {
        Ok(dec) => dec.n1 == 1 && dec.n2_factorization().is_squarefree(),
        Err(_) => false,
    }
}

/// Large-weight sign of `Δ(M², k)`, namely `(-1)^{k/2} μ(M)`, together
/// with the empirically verified weight threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPrediction {
    pub n: u64,
    pub mu_root: i64,
    /// Smallest even `k0` such that `sign Δ(N,k) = (-1)^{k/2} μ(√N)` for
    /// every even `k` in `k0..=k_max`; `None` if it fails at `k_max`.
    pub threshold: Option<u32>,
    pub k_max: u32,
}

impl SignPrediction {
    pub fn predicted_sign(&self, k: u32) -> i64 {
        sign_k(k) * self.mu_root
    }
}

/// `None` unless `N` is a cubefree square. The threshold is found by
/// scanning down from `k_max`.
pub fn sign_prediction_large_k(n: u64, k_max: u32) -> Result<Option<SignPrediction>> {
    check_weight(k_max)?;
    if !is_cubefree_square(n) {
        return Ok(None);
    }
    let mu_root = decompose_level(n)?.n2_factorization().mobius();
    let mut threshold = None;
    let mut k = k_max;
    while k >= 2 {
        if delta(n, k)?.signum() != sign_k(k) * mu_root {
            break;
        }
        threshold = Some(k);
        k -= 2;
    }
    Ok(Some(SignPrediction { n, mu_root, threshold, k_max }))
}

/// `Δ'(N,k)`: the bias with twists of level one newforms removed, for
/// `N = M²`, `M > 1` squarefree.
///
/// Twists from level one exist only for odd `M`, and each has root number
/// `∏_{p | M} (-1/p)` times that of the level one form, whose own root number
/// is `(-1)^{k/2}`. Removing them from `Δ` subtracts `∏_{p | M} (-1/p) dim S_k(1)`.
pub fn delta_prime(n: u64, k: u32) -> Result<i64> {
    check_weight(k)?;
    let dec = decompose_level(n)?;
    if dec.n1 != 1 || dec.n2 == 1 || !dec.n2_factorization().is_squarefree() {
        return Err(Error::NotSquareOfSquarefree(n));
    }
    let d = delta(n, k)?;
    if dec.n2 % 2 == 0 {
        return Ok(d);
    }
    let chi: i64 = dec.n2_factorization().primes().map(|p| kronecker(-1, p as i64) as i64).product();
    Ok(d - chi * dim_sk(1, k)? as i64)
}

/// Whether some odd `p` has `p² ∥ N` and `(-N/p² / p) = 1`, which forces the
/// root numbers of twist-minimal newforms of level `N` to balance exactly.
pub fn minimal_balance(n: u64) -> bool {
    let Ok(f) = factor(n) else { return false };
    f.pairs().iter().any(|&(p, e)| {
        p != 2 && e == 2 && kronecker(-((n / (p * p)) as i64), p as i64) == 1
    })
}

/// All even-weight grid points `N ≤ n_max`, `k ≤ k_max` with `Δ(N,k) < 0`,
/// sorted by `(N, k)`.
pub fn scan_negative(n_max: u64, k_max: u32) -> Result<Vec<(u64, u32, i64)>> {
    let mut hits: Vec<(u64, u32, i64)> = (1..=n_max)
        .into_par_iter()
        .map(|n| -> Result<Vec<(u64, u32, i64)>> {
            let mut out = Vec::new();
            for k in (2..=k_max).step_by(2) {
                let d = delta(n, k)?;
                if d < 0 {
                    out.push((n, k, d));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    hits.sort_unstable();
    Ok(hits)
}

/// `Δ(N,k)` for a level outside the five special families, evaluated as
/// `½ β(N) ∏_{p | N2} (φ(p^v) - φ(p^{v-1}) (-D/p)) h'(-D) + (-1)^{k/2} δ_{k=2} δ_{N2=1}`.
///
/// Returns `None` for levels in one of the special families.
pub fn delta_generic_product(n: u64, k: u32) -> Result<Option<i64>> {
    check_weight(k)?;
    let dec: LevelDecomposition = decompose_level(n)?;
    if level_case(&dec) != CaseTag::Generic {
        return Ok(None);
    }
    let d = field_discriminant(dec.n1);
    let prod: i64 = dec
        .n2_factorization()
        .pairs()
        .iter()
        .map(|&(p, v)| {
            let phi = |e: u32| if e == 0 { 1 } else { (p - 1) * p.pow(e - 1) };
            phi(v) as i64 - phi(v - 1) as i64 * kronecker(d, p as i64) as i64
        })
        .product();
    let main = h_prime(Discriminant::fundamental(d)?)? * Rational::new(beta(n)? as i64 * prod, 2);
    let value = main + sign_k(k) * i64::from(k == 2 && dec.n2 == 1);
    value
        .to_i64()
        .map(Some)
        .ok_or_else(|| Error::NonIntegral { context: format!("generic product form at N={n}, k={k}"), value })
}

/// Everything the CLI reports for one `(N,k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasRecord {
    pub n: u64,
    pub k: u32,
    pub delta: i64,
    pub dim_plus: u64,
    pub dim_minus: u64,
    pub zero_class: Option<ZeroClass>,
    /// `(-1)^{k/2} μ(√N)` on cubefree squares.
    pub predicted_sign_large_k: Option<i64>,
}

pub fn bias_record(n: u64, k: u32) -> Result<BiasRecord> {
    let delta = delta(n, k)?;
    let (dim_plus, dim_minus) = refined_dims(n, k)?;
    let predicted_sign_large_k = is_cubefree_square(n)
        .then(|| sign_k(k) * decompose_level(n).map(|d| d.n2_factorization().mobius()).unwrap_or(0));
    Ok(BiasRecord { n, k, delta, dim_plus, dim_minus, zero_class: classify_zero(n, k)?, predicted_sign_large_k })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_examples() {
        assert_eq!(delta(37, 2).unwrap(), 0);
        assert_eq!(delta(58, 2).unwrap(), 0);
        assert_eq!(delta(49, 14).unwrap(), 2);
        assert_eq!(delta(9, 10).unwrap(), 1);
        assert_eq!(delta(5, 3), Err(Error::InvalidWeight(3)));
    }

    #[test]
    fn refined_examples() {
        assert_eq!(refined_dims(37, 2).unwrap(), (1, 1));
        assert_eq!(refined_dims(11, 2).unwrap(), (1, 0));
        assert_eq!(refined_dims(1, 12).unwrap(), (1, 0));
    }

    #[test]
    fn zero_examples() {
        assert_eq!(classify_zero(58, 2).unwrap(), Some(ZeroClass::K2_3758));
        assert_eq!(classify_zero(16, 6).unwrap(), Some(ZeroClass::Level16K2mod4));
        assert_eq!(classify_zero(28, 4).unwrap(), Some(ZeroClass::SevenMod8TwoExactly));
        assert_eq!(classify_zero(11, 2).unwrap(), None);
        assert_eq!(classify_zero(1, 4).unwrap(), Some(ZeroClass::SquareLevelCancellation));
        // dim S_12^new(9) > 0 but the twists and the rest cancel
        assert_eq!(delta(9, 12).unwrap(), 0);
        assert!(dim_sk_new(9, 12).unwrap() > 0);
        assert_eq!(classify_zero(9, 12).unwrap(), Some(ZeroClass::SquareLevelCancellation));
    }

    #[test]
    fn zero_classification_is_exact_on_small_grid() {
        for n in 1..=400 {
            for k in (2..=40).step_by(2) {
                let d = delta(n, k).unwrap();
                assert_eq!(d == 0, classify_zero(n, k).unwrap().is_some(), "N={n} k={k} Δ={d}");
            }
        }
    }

    #[test]
    fn sign_prediction_examples() {
        for k in (12..=48).step_by(4) {
            assert!(delta(4, k).unwrap() < 0, "k = {k}");
        }
        let p = sign_prediction_large_k(9, 100).unwrap().unwrap();
        assert_eq!(p.mu_root, -1);
        assert_eq!(p.predicted_sign(10), 1);
        assert!(p.threshold.is_some());
        assert_eq!(delta(36, 26).unwrap(), -1);
        assert_eq!(sign_prediction_large_k(12, 100).unwrap(), None);
    }

    #[test]
    fn delta_prime_examples() {
        assert_eq!(delta_prime(9, 10).unwrap(), 1);
        for k in (2..=40).step_by(2) {
            assert_eq!(delta_prime(4, k).unwrap(), delta(4, k).unwrap());
        }
        // dim S_26(1) = 1 and (-1/3) = -1
        assert_eq!(delta_prime(9, 26).unwrap(), delta(9, 26).unwrap() + 1);
        assert_eq!(delta_prime(12, 4), Err(Error::NotSquareOfSquarefree(12)));
        assert_eq!(delta_prime(1, 4), Err(Error::NotSquareOfSquarefree(1)));
    }

    #[test]
    fn balance_examples() {
        assert!(minimal_balance(45));
        assert!(!minimal_balance(49));
        assert!(!minimal_balance(1));
        assert!(!minimal_balance(27));
    }

    #[test]
    fn scan_examples() {
        assert!(scan_negative(100, 10).unwrap().is_empty());
        assert_eq!(scan_negative(4, 12).unwrap(), vec![(4, 12, -1)]);
        // Level 1 is itself a cubefree square: Δ(1,k) = -dim S_k(1) for k ≡ 2 mod 4.
        let low = scan_negative(3, 50).unwrap();
        let expected: Vec<(u64, u32, i64)> = (2..=50)
            .step_by(2)
            .filter(|k| k % 4 == 2 && dim_sk(1, *k).unwrap() > 0)
            .map(|k| (1, k, -(dim_sk(1, k).unwrap() as i64)))
            .collect();
        assert_eq!(low, expected);
        assert_eq!(low[0], (1, 18, -1));
        for (n, _, _) in scan_negative(400, 40).unwrap() {
            assert!(is_cubefree_square(n), "N = {n}");
        }
    }

    #[test]
    fn generic_product_agrees() {
        for n in 1..=1500 {
            for k in [2, 4, 10, 24] {
                if let Some(d) = delta_generic_product(n, k).unwrap() {
                    assert_eq!(d, delta(n, k).unwrap(), "N={n} k={k}");
                }
            }
        }
    }
}
