//! `tr W_N` on `S_k(Γ0(N))` straight from the Skoruppa–Zagier class number
//! sum, without any of the simplifications used by the closed forms.

use crate::arith::{decompose_level, Rational};
use crate::classnum::{hurwitz, Discriminant};
use crate::error::{check_weight, Result};

use super::{integral, p_k_even};

/// Evaluates
///
/// ```text
/// tr W_N = -1/2 Σ_{M | N, N/M square} μ(√(N/M)) Σ_s p_k(s/√M) H(s² - 4M)
///          - 1/2 δ_{N ∈ {1,4}} + δ_{k=2}
/// ```
///
/// where `s` runs over all integers with `|s| ≤ 2√M` and `√(MN) | s`. Only
/// `s = 0` contributes once `N > 4`.
pub fn trace_full_direct(n: u64, k: u32) -> Result<i64> {
    check_weight(k)?;
    let dec = decompose_level(n)?;
    let n2f = dec.n2_factorization();
    let mut sum = Rational::ZERO;
    for m2f in n2f.factored_divisors() {
        let mu = n2f.quotient(&m2f).mobius();
        if mu == 0 {
            continue;
        }
        let m2 = m2f.value();
        let m = dec.n1 * m2 * m2;
        // MN = (N1 M2 N2)², so the step in s is an integer.
        let step = dec.n1 * m2 * dec.n2;
        debug_assert_eq!(step * step, m * n);
        let term = |j: i64| -> Result<Rational> {
            let s = j * step as i64;
            let h = hurwitz(Discriminant::new(s * s - 4 * m as i64)?)?;
            Ok(h * p_k_even(j * j * n as i64, k)?)
        };
        // s = j·step with s² ≤ 4M  ⇔  j²N ≤ 4, and then (s/√M)² = j²N.
        // p_k is even in s, so ±j contribute equally.
        let mut inner = term(0)?;
        let mut j = 1i64;
        while (j * j) as u64 * n <= 4 {
            inner = inner + term(j)? * 2;
            j += 1;
        }
        sum = sum + inner * mu;
    }
    let mut tr = sum * Rational::new(-1, 2);
    if n == 1 || n == 4 {
        tr = tr - Rational::new(1, 2);
    }
    if k == 2 {
        tr = tr + 1;
    }
    integral(tr, || format!("direct trace of W_{n} at weight {k}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        // tr W_4 vanishes for k ≡ 0 mod 4.
        for k in (4..=48).step_by(4) {
            assert_eq!(trace_full_direct(4, k).unwrap(), 0);
        }
        assert_eq!(trace_full_direct(1, 12).unwrap(), 1);
        // (1/2)·H(-148) with H(-148) = 2.
        assert_eq!(trace_full_direct(37, 4).unwrap(), 1);
        assert!(trace_full_direct(37, 3).is_err());
        assert!(trace_full_direct(0, 4).is_err());
    }
}
