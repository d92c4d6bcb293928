//! Class numbers of imaginary quadratic orders.
//!
//! `h'(-D)` and the Hurwitz class number `H(-D)` are computed by enumerating
//! reduced positive definite forms. The conductor relations
//! ([`h_prime_scaled`], [`h_prime_scaled_mobius`], [`hurwitz_via_relation`])
//! give a second route from the class number of the fundamental
//! discriminant alone; the two routes are tested against each other.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_integer::Integer;

use crate::arith::{factor, kronecker, Rational};
use crate::error::{Error, Result};

/// A discriminant `value = conductor² · fundamental_part` with `value ≤ 0`.
///
/// `value = 0` is accepted only so that `H(0)` can be expressed; it has
/// `fundamental_part = 0` and `conductor = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Discriminant {
    value: i64,
    fundamental_part: i64,
    conductor: u64,
}

impl Discriminant {
    pub fn new(value: i64) -> Result<Discriminant> {
        if value > 0 {
            return Err(Error::InvalidDiscriminant { value, reason: "must be non-positive" });
        }
        if !matches!(value.rem_euclid(4), 0 | 1) {
            return Err(Error::InvalidDiscriminant { value, reason: "must be 0 or 1 mod 4" });
        }
        if value == 0 {
            return Ok(Discriminant { value, fundamental_part: 0, conductor: 1 });
        }
        let abs = value.unsigned_abs();
        let (mut core, mut f) = (1u64, 1u64);
        for &(p, e) in factor(abs)?.pairs() {
            if e % 2 == 1 {
                core *= p;
            }
            f *= p.pow(e / 2);
        }
        let (fundamental_part, conductor) = if (-(core as i64)).rem_euclid(4) == 1 {
            (-(core as i64), f)
        } else {
            // -core is 2 or 3 mod 4, so value ≡ 0,1 mod 4 forces f to be even.
            debug_assert!(f % 2 == 0);
            (-4 * core as i64, f / 2)
        };
        Ok(Discriminant { value, fundamental_part, conductor })
    }

    /// A fundamental discriminant, rejecting anything else.
    pub fn fundamental(value: i64) -> Result<Discriminant> {
        let d = Discriminant::new(value)?;
        if d.is_fundamental() {
            Ok(d)
        } else {
            Err(Error::NotFundamental(value))
        }
    }

    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn fundamental_part(&self) -> i64 {
        self.fundamental_part
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_fundamental(&self) -> bool {
        self.value < 0 && self.conductor == 1
    }

    /// `λ² · self`, for a conductor multiplier `λ ≥ 1`.
    pub fn scaled(&self, lambda: u64) -> Result<Discriminant> {
        Discriminant::new(self.value * (lambda * lambda) as i64)
    }

    fn require_negative(&self) -> Result<()> {
        if self.value < 0 {
            Ok(())
        } else {
            Err(Error::InvalidDiscriminant { value: self.value, reason: "must be negative" })
        }
    }

    fn require_fundamental(&self) -> Result<()> {
        if self.is_fundamental() {
            Ok(())
        } else {
            Err(Error::NotFundamental(self.value))
        }
    }
}

/// A binary quadratic form `a x² + b xy + c y²`.
pub type Form = (i64, i64, i64);

/// Reduced positive definite forms of discriminant `d`, ordered by `(a, b)`.
///
/// Reduced means `|b| ≤ a ≤ c`, with `b ≥ 0` whenever `|b| = a` or `a = c`.
pub fn reduced_forms(d: Discriminant, primitive_only: bool) -> Result<Vec<Form>> {
    d.require_negative()?;
    let disc = d.value();
    let abs = disc.unsigned_abs() as i64;
    let mut forms = Vec::new();
    let mut a = 1i64;
    // 3a² ≤ |d|
    while 3 * a * a <= abs {
        let parity = disc.rem_euclid(2);
        let mut b = -a + (parity - (-a).rem_euclid(2)).rem_euclid(2);
        while b <= a {
            let num = b * b - disc;
            if num % (4 * a) == 0 {
                let c = num / (4 * a);
                let boundary = b.abs() == a || a == c;
                if c >= a && !(boundary && b < 0) && (!primitive_only || a.gcd(&b).gcd(&c) == 1) {
                    forms.push((a, b, c));
                }
            }
            b += 2;
        }
        a += 1;
    }
    Ok(forms)
}

fn form_weight(&(a, b, c): &Form) -> Rational {
    if b == 0 && a == c {
        Rational::new(1, 2)
    } else if a == b && b == c {
        Rational::new(1, 3)
    } else {
        Rational::ONE
    }
}

/// Memo table for `h'` and `H` keyed by discriminant. Concurrent lookups and
/// inserts are fine; two threads racing on the same key both compute the
/// same value and one insert wins.
#[derive(Debug, Default)]
pub struct ClassNumberCache {
    h_prime: RwLock<HashMap<i64, Rational>>,
    hurwitz: RwLock<HashMap<i64, Rational>>,
}

impl ClassNumberCache {
    pub fn new() -> ClassNumberCache {
        ClassNumberCache::default()
    }

    fn get_or_compute(
        map: &RwLock<HashMap<i64, Rational>>,
        key: i64,
        compute: impl FnOnce() -> Result<Rational>,
    ) -> Result<Rational> {
        if let Some(v) = map.read().expect("class number cache poisoned").get(&key) {
            return Ok(v.clone());
        }
        let v = compute()?;
        map.write()
            .expect("class number cache poisoned")
            .entry(key)
            .or_insert_with(|| v.clone());
        Ok(v)
    }

    pub fn h_prime(&self, d: Discriminant) -> Result<Rational> {
        d.require_negative()?;
        Self::get_or_compute(&self.h_prime, d.value(), || h_prime_uncached(d))
    }

    pub fn hurwitz(&self, d: Discriminant) -> Result<Rational> {
        if d.value() == 0 {
            return Ok(Rational::new(-1, 12));
        }
        Self::get_or_compute(&self.hurwitz, d.value(), || hurwitz_uncached(d))
    }

    pub fn len(&self) -> usize {
        self.h_prime.read().map_or(0, |m| m.len()) + self.hurwitz.read().map_or(0, |m| m.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The process-wide cache used by [`h_prime`] and [`hurwitz`].
pub fn global_cache() -> &'static ClassNumberCache {
    static CACHE: OnceLock<ClassNumberCache> = OnceLock::new();
    CACHE.get_or_init(ClassNumberCache::new)
}

fn h_prime_uncached(d: Discriminant) -> Result<Rational> {
    let forms = reduced_forms(d, true)?;
    Ok(match d.value() {
        -3 => Rational::new(1, 3),
        -4 => Rational::new(1, 2),
        _ => Rational::from_integer(forms.len() as i64),
    })
}

fn hurwitz_uncached(d: Discriminant) -> Result<Rational> {
    Ok(reduced_forms(d, false)?.iter().map(form_weight).sum())
}

/// Class number of the order of discriminant `d`, with `h'(-3) = 1/3` and
/// `h'(-4) = 1/2`.
pub fn h_prime(d: Discriminant) -> Result<Rational> {
    global_cache().h_prime(d)
}

/// Hurwitz class number by enumeration of all reduced forms; `H(0) = -1/12`.
pub fn hurwitz(d: Discriminant) -> Result<Rational> {
    global_cache().hurwitz(d)
}

/// `h'(-λ²D) = λ ∏_{p | λ} (1 - (-D/p)/p) h'(-D)` for fundamental `-D`.
pub fn h_prime_scaled(d_fund: Discriminant, lambda: u64) -> Result<Rational> {
    d_fund.require_fundamental()?;
    let base = h_prime(d_fund)?;
    let mut acc = Rational::from_integer(lambda as i64);
    for p in factor(lambda)?.primes() {
        let chi = kronecker(d_fund.value(), p as i64) as i64;
        acc = acc * Rational::new(p as i64 - chi, p as i64);
    }
    Ok(acc * base)
}

/// Same quantity as [`h_prime_scaled`], written as the divisor sum
/// `λ Σ_{t | λ} μ(t) (-D/t) / t · h'(-D)`.
pub fn h_prime_scaled_mobius(d_fund: Discriminant, lambda: u64) -> Result<Rational> {
    d_fund.require_fundamental()?;
    let base = h_prime(d_fund)?;
    let sum: Rational = factor(lambda)?
        .factored_divisors()
        .iter()
        .filter(|t| t.is_squarefree())
        .map(|t| {
            let tv = t.value() as i64;
            Rational::new(t.mobius() * kronecker(d_fund.value(), tv) as i64, tv)
        })
        .sum();
    Ok(sum * lambda as i64 * base)
}

/// `H(-λ²D) = Σ_{t | λ} μ(t) (-D/t) σ(λ/t) h'(-D)` for fundamental `-D`.
pub fn hurwitz_via_relation(d_fund: Discriminant, lambda: u64) -> Result<Rational> {
    d_fund.require_fundamental()?;
    let base = h_prime(d_fund)?;
    let lf = factor(lambda)?;
    let total: i64 = lf
        .factored_divisors()
        .iter()
        .filter(|t| t.is_squarefree())
        .map(|t| t.mobius() * kronecker(d_fund.value(), t.value() as i64) as i64 * lf.quotient(t).sigma() as i64)
        .sum();
    Ok(base * total)
}

/// `H(-λ²D) = Σ_{t | λ} h'(-D t²)`, each term by enumeration.
pub fn hurwitz_via_conductors(d_fund: Discriminant, lambda: u64) -> Result<Rational> {
    d_fund.require_fundamental()?;
    factor(lambda)?
        .divisors()
        .into_iter()
        .map(|t| h_prime(d_fund.scaled(t)?))
        .sum()
}
