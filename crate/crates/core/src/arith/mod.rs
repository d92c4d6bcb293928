//! Integer factorization, multiplicative functions and the Kronecker symbol.

mod rational;

pub use rational::Rational;

use crate::error::{Error, Result};

/// Prime factorization `[(p, e)]` with strictly increasing primes. The empty
/// list is the factorization of 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Factorization(Vec<(u64, u32)>);

impl Factorization {
    /// Builds a factorization from prime powers. Primes must be strictly
    /// increasing and exponents positive.
    pub fn from_prime_powers(pairs: Vec<(u64, u32)>) -> Factorization {
        debug_assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(pairs.iter().all(|&(p, e)| p >= 2 && e >= 1));
        Factorization(pairs)
    }

    pub fn pairs(&self) -> &[(u64, u32)] {
        &self.0
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().map(|&(p, _)| p)
    }

    pub fn value(&self) -> u64 {
        self.0.iter().map(|&(p, e)| p.pow(e)).product()
    }

    /// `v_p` of the factored integer.
    pub fn exponent(&self, p: u64) -> u32 {
        self.0.iter().find(|&&(q, _)| q == p).map_or(0, |&(_, e)| e)
    }

    pub fn is_squarefree(&self) -> bool {
        self.0.iter().all(|&(_, e)| e == 1)
    }

    pub fn mobius(&self) -> i64 {
        if self.is_squarefree() {
            if self.0.len().is_multiple_of(2) {
                1
            } else {
                -1
            }
        } else {
            0
        }
    }

    pub fn euler_phi(&self) -> u64 {
        self.0.iter().map(|&(p, e)| (p - 1) * p.pow(e - 1)).product()
    }

    /// Sum of divisors.
    pub fn sigma(&self) -> u64 {
        self.0
            .iter()
            .map(|&(p, e)| (p.pow(e + 1) - 1) / (p - 1))
            .product()
    }

    /// Number of divisors.
    pub fn sigma0(&self) -> u64 {
        self.0.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    /// Number of distinct prime divisors.
    pub fn omega(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn odd_part(&self) -> u64 {
        self.0
            .iter()
            .filter(|&&(p, _)| p != 2)
            .map(|&(p, e)| p.pow(e))
            .product()
    }

    /// All divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.0 {
            let len = divs.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }

    /// Divisors paired with their own factorizations.
    pub fn factored_divisors(&self) -> Vec<Factorization> {
        let mut out = vec![Factorization::default()];
        for &(p, e) in &self.0 {
            let len = out.len();
            for k in 1..=e {
                for i in 0..len {
                    let mut f = out[i].0.clone();
                    f.push((p, k));
                    out.push(Factorization(f));
                }
            }
        }
        out
    }

    /// Factorization of `n / d` given the factorization of a divisor `d`.
    pub fn quotient(&self, d: &Factorization) -> Factorization {
        Factorization(
            self.0
                .iter()
                .filter_map(|&(p, e)| {
                    let r = e - d.exponent(p);
                    (r > 0).then_some((p, r))
                })
                .collect(),
        )
    }
}

/// Trial division with a mod-30 wheel.
pub fn factor(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::Zero);
    }
    let mut n = n;
    let mut out = Vec::new();
    let mut take = |n: &mut u64, p: u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    for p in [2, 3, 5] {
        take(&mut n, p);
    }
    const STEPS: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut p = 7u64;
    let mut i = 0;
    while p.saturating_mul(p) <= n {
        take(&mut n, p);
        p += STEPS[i];
        i = (i + 1) % 8;
    }
    if n > 1 {
        out.push((n, 1));
    }
    Ok(Factorization(out))
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factor(n).is_ok_and(|f| f.pairs() == [(n, 1)])
}

/// `N = N1 · N2²` with `N1` squarefree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LevelDecomposition {
    pub n: u64,
    pub n1: u64,
    pub n2: u64,
    pub factorization: Factorization,
}

impl LevelDecomposition {
    /// Factorization of `N2`.
    pub fn n2_factorization(&self) -> Factorization {
        Factorization(
            self.factorization
                .pairs()
                .iter()
                .filter(|&&(_, e)| e >= 2)
                .map(|&(p, e)| (p, e / 2))
                .collect(),
        )
    }
}

pub fn decompose_level(n: u64) -> Result<LevelDecomposition> {
    let factorization = factor(n)?;
    let (mut n1, mut n2) = (1u64, 1u64);
    for &(p, e) in factorization.pairs() {
        if e % 2 == 1 {
            n1 *= p;
        }
        n2 *= p.pow(e / 2);
    }
    Ok(LevelDecomposition { n, n1, n2, factorization })
}

pub fn mobius(n: u64) -> Result<i64> {
    Ok(factor(n)?.mobius())
}

pub fn euler_phi(n: u64) -> Result<u64> {
    Ok(factor(n)?.euler_phi())
}

pub fn sigma(n: u64) -> Result<u64> {
    Ok(factor(n)?.sigma())
}

pub fn omega(n: u64) -> Result<u32> {
    Ok(factor(n)?.omega())
}

pub fn odd_part(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Zero);
    }
    Ok(n >> n.trailing_zeros())
}

pub fn vp(n: u64, p: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::Zero);
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let (mut n, mut e) = (n, 0);
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    Ok(e)
}

/// Jacobi symbol `(a/n)` for odd `n > 0`.
fn jacobi(a: i128, n: u128) -> i8 {
    debug_assert!(n % 2 == 1);
    let mut a = a.rem_euclid(n as i128) as u128;
    let mut n = n;
    let mut t = 1i8;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol `(a/n)`, defined for all integers `a` and `n`.
pub fn kronecker(a: i64, n: i64) -> i8 {
    let a = a as i128;
    if n == 0 {
        return if a.abs() == 1 { 1 } else { 0 };
    }
    let mut t = 1i8;
    let mut m = (n as i128).unsigned_abs();
    if n < 0 && a < 0 {
        t = -t;
    }
    let v2 = m.trailing_zeros();
    if v2 > 0 {
        if a % 2 == 0 {
            return 0;
        }
        m >>= v2;
        if v2 % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            t = -t;
        }
    }
    t * jacobi(a, m)
}
