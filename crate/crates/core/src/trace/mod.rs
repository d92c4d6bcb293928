//! Traces of the Fricke involution on `S_k(Γ0(N))` and `S_k^new(N)`.
//!
//! There are two routes to each trace:
//!
//! * full space: [`trace_full_direct`] (raw class number sum) and
//!   [`trace_full_closed`] (a single weighted class number `h'`);
//! * new subspace: [`trace_new_mobius`] (Möbius inversion of the full-space
//!   closed form over `Q² | N`) and [`trace_new_closed`] (five-case formula).
//!
//! Write `N = N1 N2²` with `N1` squarefree and let `-D ∈ {-N1, -4N1}` be the
//! discriminant of `Q(√-N)`. All intermediate values are exact rationals.

mod corrections;
mod direct;

pub use corrections::{correction_terms, correction_xi, Corrections, EpsilonBranch, Xi0Branch};
pub use direct::trace_full_direct;

use std::fmt;

use crate::arith::{decompose_level, kronecker, Factorization, LevelDecomposition, Rational};
use crate::classnum::{h_prime, h_prime_scaled, Discriminant};
use crate::error::{check_weight, Error, Result};

/// `(-1)^{k/2}` for even `k`.
pub fn sign_k(k: u32) -> i64 {
    if (k / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub(crate) fn integral(value: Rational, context: impl FnOnce() -> String) -> Result<i64> {
    value.to_i64().ok_or_else(|| Error::NonIntegral { context: context(), value })
}

/// `p_k(s) = (ρ^{k-1} - ρ̄^{k-1}) / (ρ - ρ̄)` for `ρ, ρ̄` the roots of
/// `X² - sX + 1`, as a function of `s² ∈ {0,..,4}` for even `k`.
///
/// Runs `a_{j+1} = (s² - 2) a_j - a_{j-1}` from `a_0 = 1` (k = 2) and
/// `a_1 = s² - 1` (k = 4). At `s² = 4` this gives `k - 1`.
pub fn p_k_even(s_squared: i64, k: u32) -> Result<i64> {
    check_weight(k)?;
    if !(0..=4).contains(&s_squared) {
        return Err(Error::SSquaredOutOfRange(s_squared));
    }
    let (mut prev, mut cur) = (1i64, s_squared - 1);
    if k == 2 {
        return Ok(prev);
    }
    for _ in 2..k / 2 {
        (prev, cur) = (cur, (s_squared - 2) * cur - prev);
    }
    Ok(cur)
}

/// Discriminant of `Q(√-N)` given the squarefree part `N1`.
pub fn field_discriminant(n1: u64) -> i64 {
    if n1 % 4 == 3 {
        -(n1 as i64)
    } else {
        -4 * n1 as i64
    }
}

/// `tr W_N` for `N ≤ 4` from the explicit small-level tables; `None` above 4.
pub fn small_level_trace(n: u64, k: u32) -> Option<i64> {
    let k2 = i64::from(k == 2);
    let s = sign_k(k);
    let floor = (k / 12) as i64;
    match n {
        1 => Some(if k % 12 == 2 { floor - 1 + k2 } else { floor }),
        2 => Some(if matches!(k % 8, 0 | 2) { s * (1 - k2) } else { 0 }),
        3 => Some(if matches!(k % 12, 0 | 2 | 6 | 8) { s * (1 - k2) } else { 0 }),
        4 => Some(if k.is_multiple_of(4) { 0 } else { -1 + k2 }),
        _ => None,
    }
}

/// The weighted class number `X` with `tr W_N = (-1)^{k/2} X + δ_{k=2}` for
/// `N > 4`.
fn full_trace_class_term(dec: &LevelDecomposition) -> Result<Rational> {
    let d = field_discriminant(dec.n1);
    let h = h_prime_scaled(Discriminant::fundamental(d)?, dec.n2)?;
    Ok(if dec.n1 % 4 != 3 {
        // h'(-4N)
        h * Rational::new(1, 2)
    } else if dec.n2 % 2 == 1 {
        // (1/2)(3 - (-N1/2)) h'(-N)
        h * Rational::new(3 - kronecker(d, 2) as i64, 2)
    } else {
        h
    })
}

/// `tr W_N` on `S_k(Γ0(N))` in closed form.
///
/// For `N > 4` this is `(-1)^{k/2} X + δ_{k=2}` with `X` one of
/// `h'(-4N)/2`, `(3 - (-N1/2)) h'(-N)/2` or `h'(-N)` according to `N1 mod 4`
/// and the parity of `N2`.
pub fn trace_full_closed(n: u64, k: u32) -> Result<i64> {
    check_weight(k)?;
    if n == 0 {
        return Err(Error::Zero);
    }
    if let Some(t) = small_level_trace(n, k) {
        return Ok(t);
    }
    let dec = decompose_level(n)?;
    let value = full_trace_class_term(&dec)? * sign_k(k) + i64::from(k == 2);
    integral(value, || format!("closed trace of W_{n} at weight {k}"))
}

/// `tr W_N^new = Σ_{Q² | N} μ(Q) tr W_{N/Q²}`.
pub fn trace_new_mobius(n: u64, k: u32) -> Result<i64> {
    check_weight(k)?;
    let dec = decompose_level(n)?;
    let mut total = 0i64;
    for q in dec.n2_factorization().factored_divisors() {
        let mu = q.mobius();
        if mu != 0 {
            let qv = q.value();
            total += mu * trace_full_closed(n / (qv * qv), k)?;
        }
    }
    Ok(total)
}

/// `β(N) ∈ {1, 2, 3, 4}`.
pub fn beta(n: u64) -> Result<u8> {
    Ok(beta_of(&decompose_level(n)?))
}

fn beta_of(dec: &LevelDecomposition) -> u8 {
    if matches!(dec.n1 % 4, 1 | 2) || dec.n2 % 4 == 2 {
        1
    } else if dec.n2.is_multiple_of(4) {
        2
    } else {
        (3 - kronecker(-(dec.n1 as i64), 2)) as u8
    }
}

/// The weight `b(N)` attached to `h'` in the full-space closed form.
pub fn b_weight(n: u64) -> Result<Rational> {
    let dec = decompose_level(n)?;
    Ok(if dec.n1 % 4 != 3 {
        Rational::new(1, 2)
    } else if dec.n2 % 2 == 1 {
        Rational::new(3 - kronecker(-(dec.n1 as i64), 2) as i64, 2)
    } else {
        Rational::ONE
    })
}

fn c_coeff_of(d: i64, nf: &Factorization) -> u64 {
    nf.pairs()
        .iter()
        .map(|&(p, e)| {
            let chi = kronecker(d, p as i64) as i64;
            let p_i = p as i64;
            if e == 1 {
                (p_i - 1 - chi) as u64
            } else {
                p.pow(e - 2) * (p - 1) * (p_i - chi) as u64
            }
        })
        .product()
}

/// `c(-D, n) = Σ_{t | n} φ(n/t) μ(t) (-D/t)`, evaluated through its Euler
/// product. `d` is the fundamental discriminant `-D`.
pub fn c_coeff(d: i64, n: u64) -> Result<u64> {
    Discriminant::fundamental(d)?;
    Ok(c_coeff_of(d, &crate::arith::factor(n)?))
}

/// `c'(-D, N2)`: half of `c` when `N1 ≡ 3 mod 8` and `2 ∥ N2`.
pub fn c_prime(n: u64) -> Result<Rational> {
    let dec = decompose_level(n)?;
    let c = c_coeff_of(field_discriminant(dec.n1), &dec.n2_factorization()) as i64;
    Ok(if dec.n1 % 8 == 3 && dec.n2 % 4 == 2 { Rational::new(c, 2) } else { Rational::from_integer(c) })
}

/// Routing of a level through the newspace trace formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseTag {
    /// Not 1, 2, 3 or 4 times the square of a squarefree number.
    Generic,
    /// `N = N2²`, `N2` odd squarefree.
    SquareOddRoot,
    /// `N = N2²`, `N2` even squarefree.
    SquareEvenRoot,
    /// `N = N2²`, `N2` twice an even squarefree number.
    SquareTwiceEven,
    /// `N = 2 N2²`, `N2` squarefree.
    TwiceSquare,
    /// `N = 3 N2²`, `N2` squarefree.
    ThriceSquare,
    /// `N ≤ 4`, where the full-space trace comes from explicit tables.
    SmallLevel,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::Generic => "Generic",
            CaseTag::SquareOddRoot => "Square_OddRoot",
            CaseTag::SquareEvenRoot => "Square_EvenRoot",
            CaseTag::SquareTwiceEven => "Square_TwiceEven",
            CaseTag::TwiceSquare => "TwiceSquare",
            CaseTag::ThriceSquare => "ThriceSquare",
            CaseTag::SmallLevel => "SmallLevel",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which of the five newspace cases `N` falls into (never `SmallLevel`).
pub fn level_case(dec: &LevelDecomposition) -> CaseTag {
    let n2f = dec.n2_factorization();
    let sqfree = n2f.is_squarefree();
    match dec.n1 {
        1 if sqfree && dec.n2 % 2 == 1 => CaseTag::SquareOddRoot,
        1 if sqfree => CaseTag::SquareEvenRoot,
        1 if dec.n2 % 8 == 4 && crate::arith::factor(dec.n2 / 4).is_ok_and(|f| f.is_squarefree()) => {
            CaseTag::SquareTwiceEven
        }
        2 if sqfree => CaseTag::TwiceSquare,
        3 if sqfree => CaseTag::ThriceSquare,
        _ => CaseTag::Generic,
    }
}

/// `tr W_N^new` from the five-case closed formula.
pub fn trace_new_closed(n: u64, k: u32) -> Result<i64> {
    trace_new_closed_with_beta(n, k, beta)
}

/// [`trace_new_closed`] with the `β` function supplied by the caller, so
/// verification harnesses can check that a perturbed `β` is caught.
#[doc(hidden)]
pub fn trace_new_closed_with_beta(n: u64, k: u32, beta_fn: fn(u64) -> Result<u8>) -> Result<i64> {
    check_weight(k)?;
    let dec = decompose_level(n)?;
    let n2f = dec.n2_factorization();
    let s = sign_k(k);
    let mu = n2f.mobius();
    let k2_n2_1 = i64::from(k == 2 && dec.n2 == 1);
    let c = |d: i64| c_coeff_of(d, &n2f) as i64;
    let floor = (k / 12) as i64;

    let value = match level_case(&dec) {
        CaseTag::Generic => {
            let d = field_discriminant(dec.n1);
            let h = h_prime(Discriminant::fundamental(d)?)?;
            h * Rational::new(s * beta_fn(n)? as i64 * c(d), 2) + k2_n2_1
        }
        CaseTag::SquareOddRoot => {
            let kappa = i64::from(k % 12 == 2);
            Rational::new(s * (c(-4) - mu), 4) + mu * (floor - kappa) + k2_n2_1
        }
        CaseTag::SquareEvenRoot => {
            let kappa = i64::from(matches!(k % 12, 6 | 10));
            Rational::new(s * (c(-4) + mu), 4) + mu * (floor + kappa)
        }
        CaseTag::SquareTwiceEven => {
            let mu_half = decompose_level(dec.n2 / 2)?.factorization.mobius();
            Rational::new(s * c(-4), 4) - Rational::new(mu_half, 2)
        }
        CaseTag::TwiceSquare => {
            let kappa = if matches!(k % 8, 0 | 2) { 1 } else { -1 };
            Rational::new(s * (c(-8) + kappa * mu), 2) + k2_n2_1
        }
        CaseTag::ThriceSquare => {
            let kappa = if matches!(k % 12, 4 | 10) { -2 } else { 1 };
            let inner = Rational::new(beta_fn(n)? as i64 * c(-3), 2) + kappa * mu;
            inner * Rational::new(s, 3) + k2_n2_1
        }
        CaseTag::SmallLevel => unreachable!("level_case never returns SmallLevel"),
    };
    integral(value, || format!("closed newspace trace of W_{n} at weight {k}"))
}

/// Everything computed about `W_N` at one `(N, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceReport {
    pub n: u64,
    pub k: u32,
    pub tr_full: i64,
    pub tr_new: i64,
    /// `Δ(N,k) = (-1)^{k/2} tr W_N^new`.
    pub delta: i64,
    pub case_tag: CaseTag,
    pub corrections: Corrections,
}

/// Computes the full and new traces and checks that
/// `tr W_N = Σ_{Q | N2} tr W_{N/Q²}^new`.
pub fn trace_report(n: u64, k: u32) -> Result<TraceReport> {
    check_weight(k)?;
    let dec = decompose_level(n)?;
    let tr_full = trace_full_closed(n, k)?;
    let tr_new = trace_new_closed(n, k)?;
    let mut summed = 0;
    for q in dec.n2_factorization().divisors() {
        summed += trace_new_closed(n / (q * q), k)?;
    }
    if summed != tr_full {
        return Err(Error::InconsistentTraces { n, k, full: tr_full, summed });
    }
    let case_tag = if n <= 4 { CaseTag::SmallLevel } else { level_case(&dec) };
    Ok(TraceReport {
        n,
        k,
        tr_full,
        tr_new,
        delta: sign_k(k) * tr_new,
        case_tag,
        corrections: correction_terms(n, k)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::factor;

    #[test]
    fn p_k_examples() {
        for s2 in 0..=4 {
            assert_eq!(p_k_even(s2, 2).unwrap(), 1);
        }
        assert_eq!(p_k_even(0, 4).unwrap(), -1);
        assert_eq!(p_k_even(4, 4).unwrap(), 3);
        assert!(p_k_even(5, 4).is_err());
        assert!(p_k_even(-1, 4).is_err());
        assert!(p_k_even(2, 5).is_err());
    }

    /// `p_k` at `s = 2cos θ` equals `sin((k-1)θ)/sin θ`; for `s² = 0, 1, 2, 3`
    /// the angles are π/2, π/3, π/4, π/6, which give periodic tables in `k`.
    fn p_k_periodic(s2: i64, k: u32) -> i64 {
        let k = k as i64;
        match s2 {
            0 => if ((k - 2) / 2) % 2 == 0 { 1 } else { -1 },
            // sin((k-1)π/3)/sin(π/3), period 6
            1 => [0, 1, 1, 0, -1, -1][((k - 1) % 6) as usize],
            // sin((k-1)π/4)/sin(π/4), odd multiples only since k-1 is odd
            2 => [0, 1, 0, 1, 0, -1, 0, -1][((k - 1) % 8) as usize],
            // sin((k-1)π/6)/sin(π/6), period 12
            3 => [0, 1, 0, 2, 0, 1, 0, -1, 0, -2, 0, -1][((k - 1) % 12) as usize],
            4 => k - 1,
            _ => unreachable!(),
        }
    }

    #[test]
    fn p_k_matches_periodic_forms_and_recurrence() {
        for s2 in 0..=4 {
            for k in (2..=200).step_by(2) {
                assert_eq!(p_k_even(s2, k).unwrap(), p_k_periodic(s2, k), "s²={s2} k={k}");
                if k >= 6 {
                    let lhs = p_k_even(s2, k).unwrap();
                    let rhs = (s2 - 2) * p_k_even(s2, k - 2).unwrap() - p_k_even(s2, k - 4).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn full_closed_examples() {
        assert_eq!(trace_full_closed(2, 10).unwrap(), -1);
        assert_eq!(trace_full_closed(12, 4).unwrap(), 1);
        assert_eq!(trace_full_closed(37, 2).unwrap(), 0);
        assert_eq!(trace_full_closed(3, 7), Err(Error::InvalidWeight(7)));
    }

    #[test]
    fn new_mobius_examples() {
        assert_eq!(trace_new_mobius(4, 14).unwrap(), -1);
        assert_eq!(trace_new_mobius(49, 14).unwrap(), -2);
        assert_eq!(trace_new_mobius(9, 10).unwrap(), -1);
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta(37).unwrap(), 1);
        assert_eq!(beta(3).unwrap(), 4);
        assert_eq!(beta(7).unwrap(), 2);
        assert_eq!(beta(7 * 16).unwrap(), 2);
        assert_eq!(beta(7 * 4).unwrap(), 1);
    }

    #[test]
    fn c_examples() {
        assert_eq!(c_coeff(-4, 1).unwrap(), 1);
        assert_eq!(c_coeff(-4, 7).unwrap(), 7);
        assert_eq!(c_coeff(-8, 2).unwrap(), 1);
        assert_eq!(c_coeff(-12, 2), Err(Error::NotFundamental(-12)));
    }

    /// Divisor-sum definition of `c(-D, n)`.
    fn c_by_definition(d: i64, n: u64) -> i64 {
        let f = factor(n).unwrap();
        f.factored_divisors()
            .iter()
            .map(|t| f.quotient(t).euler_phi() as i64 * t.mobius() * kronecker(d, t.value() as i64) as i64)
            .sum()
    }

    #[test]
    fn c_product_matches_definition() {
        for dabs in 3..=500i64 {
            let d = -dabs;
            if Discriminant::fundamental(d).is_err() {
                continue;
            }
            for n in 1..=2000u64 {
                let c = c_coeff(d, n).unwrap();
                assert_eq!(c as i64, c_by_definition(d, n), "c({d}, {n})");
                let zero_expected = n % 4 == 2 && kronecker(d, 2) == 1;
                assert_eq!(c == 0, zero_expected, "c({d}, {n}) = {c}");
            }
        }
    }

    #[test]
    fn b_c_prime_relation() {
        // b(N) c'(-D, N2) = β(N) c(-D, N2) / 2
        for n in 1..=3000u64 {
            let dec = decompose_level(n).unwrap();
            let c = c_coeff(field_discriminant(dec.n1), dec.n2).unwrap() as i64;
            let lhs = b_weight(n).unwrap() * c_prime(n).unwrap();
            let rhs = Rational::new(beta(n).unwrap() as i64 * c, 2);
            assert_eq!(lhs, rhs, "N = {n}");
        }
    }

    #[test]
    fn new_closed_examples() {
        for k in (2..=50).step_by(4) {
            assert_eq!(trace_new_closed(16, k).unwrap(), 0, "k = {k}");
        }
        assert_eq!(trace_new_closed(8, 8).unwrap(), 0);
        assert_eq!(trace_new_closed(12, 4).unwrap(), 1);
    }

    #[test]
    fn case_routing() {
        let case = |n| level_case(&decompose_level(n).unwrap());
        assert_eq!(case(37), CaseTag::Generic);
        assert_eq!(case(9), CaseTag::SquareOddRoot);
        assert_eq!(case(1), CaseTag::SquareOddRoot);
        assert_eq!(case(36), CaseTag::SquareEvenRoot);
        assert_eq!(case(4), CaseTag::SquareEvenRoot);
        assert_eq!(case(16), CaseTag::SquareTwiceEven);
        assert_eq!(case(144), CaseTag::SquareTwiceEven);
        assert_eq!(case(2), CaseTag::TwiceSquare);
        assert_eq!(case(72), CaseTag::TwiceSquare);
        assert_eq!(case(3), CaseTag::ThriceSquare);
        assert_eq!(case(108), CaseTag::ThriceSquare);
        assert_eq!(case(64), CaseTag::Generic);
        assert_eq!(case(27), CaseTag::ThriceSquare);
        assert_eq!(case(48), CaseTag::Generic);
    }

    #[test]
    fn small_levels_match_direct_sum() {
        for n in 1..=4 {
            for k in (2..=200).step_by(2) {
                assert_eq!(small_level_trace(n, k).unwrap(), trace_full_direct(n, k).unwrap(), "N={n} k={k}");
            }
        }
    }

    #[test]
    fn report_consistency() {
        let r = trace_report(49, 14).unwrap();
        assert_eq!(r.delta, 2);
        assert_eq!(r.case_tag, CaseTag::SquareOddRoot);
        assert_eq!(trace_report(3, 10).unwrap().case_tag, CaseTag::SmallLevel);
    }
}
