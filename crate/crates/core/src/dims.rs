//! Dimensions of `S_k(Γ0(N))` and its new subspace from the valence formula.

use num_integer::Integer;

use crate::arith::{factor, kronecker, Factorization};
use crate::error::{check_weight, Result};

/// Group-theoretic data of `Γ0(N)` together with the resulting dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionBreakdown {
    pub n: u64,
    pub k: u32,
    /// Index of `Γ0(N)` in `SL2(Z)`.
    pub index_mu: u64,
    pub nu2: u64,
    pub nu3: u64,
    pub nu_inf: u64,
    pub genus: u64,
    pub dim_full: u64,
    pub dim_new: u64,
}

struct GroupData {
    index_mu: u64,
    nu2: u64,
    nu3: u64,
    nu_inf: u64,
    genus: u64,
}

fn elliptic_count(f: &Factorization, d: i64, bad: u64) -> u64 {
    if f.value().is_multiple_of(bad) {
        return 0;
    }
    f.primes().map(|p| (1 + kronecker(d, p as i64) as i64) as u64).product()
}

fn group_data(f: &Factorization) -> GroupData {
    let n = f.value();
    let index_mu: u64 = f.pairs().iter().map(|&(p, e)| p.pow(e - 1) * (p + 1)).product();
    let nu2 = elliptic_count(f, -4, 4);
    let nu3 = elliptic_count(f, -3, 9);
    let nu_inf: u64 = f
        .divisors()
        .into_iter()
        .map(|d| factor(d.gcd(&(n / d))).expect("nonzero").euler_phi())
        .sum();
    // 12 g = 12 + μ - 3 ν2 - 4 ν3 - 6 ν∞
    let twelve_g = 12 + index_mu as i64 - 3 * nu2 as i64 - 4 * nu3 as i64 - 6 * nu_inf as i64;
    debug_assert!(twelve_g >= 0 && twelve_g % 12 == 0);
    GroupData { index_mu, nu2, nu3, nu_inf, genus: (twelve_g / 12) as u64 }
}

fn dim_from_data(g: &GroupData, k: u32) -> u64 {
    if k == 2 {
        return g.genus;
    }
    let k = k as i64;
    let dim = (k - 1) * (g.genus as i64 - 1)
        + (k / 2 - 1) * g.nu_inf as i64
        + g.nu2 as i64 * (k / 4)
        + g.nu3 as i64 * (k / 3);
    debug_assert!(dim >= 0);
    dim as u64
}

fn dim_of(f: &Factorization, k: u32) -> u64 {
    dim_from_data(&group_data(f), k)
}

/// `Σ_{d | N} β'(d) dim S_k(N/d)` with `β' = μ * μ`.
fn dim_new_of(f: &Factorization, k: u32) -> u64 {
    let mut total = 0i64;
    for d in f.factored_divisors() {
        let coeff: i64 = d
            .pairs()
            .iter()
            .map(|&(_, e)| match e {
                1 => -2,
                2 => 1,
                _ => 0,
            })
            .product();
        if coeff != 0 {
            total += coeff * dim_of(&f.quotient(&d), k) as i64;
        }
    }
    debug_assert!(total >= 0);
    total as u64
}

/// `dim S_k(Γ0(N))`.
pub fn dim_sk(n: u64, k: u32) -> Result<u64> {
    check_weight(k)?;
    Ok(dim_of(&factor(n)?, k))
}

/// `dim S_k^new(Γ0(N))`.
pub fn dim_sk_new(n: u64, k: u32) -> Result<u64> {
    check_weight(k)?;
    Ok(dim_new_of(&factor(n)?, k))
}

pub fn dimension_breakdown(n: u64, k: u32) -> Result<DimensionBreakdown> {
    check_weight(k)?;
    let f = factor(n)?;
    let g = group_data(&f);
    Ok(DimensionBreakdown {
        n,
        k,
        index_mu: g.index_mu,
        nu2: g.nu2,
        nu3: g.nu3,
        nu_inf: g.nu_inf,
        genus: g.genus,
        dim_full: dim_from_data(&g, k),
        dim_new: dim_new_of(&f, k),
    })
}
