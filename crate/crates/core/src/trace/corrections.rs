//! Correction terms `ξ(N,k) = ξ0(N,k) + δ_{k=2}(δ_{N2=1} + ε(N))`.
//!
//! They account for the levels `N1 Q² ≤ 4` in the alternating sum over
//! `Q | N2`, where the trace on the full space does not follow the generic
//! `b(M) h'(-DQ²)` shape, and for the `δ_{k=2}` term those small levels
//! already carry.

use crate::arith::{decompose_level, Factorization, LevelDecomposition, Rational};
use crate::error::{check_weight, Result};

use super::{sign_k, small_level_trace};

/// Which row of the `ξ0` table applies to a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Xi0Branch {
    /// `N1 = 1`, `N2` odd squarefree.
    OddSquarefreeSquare,
    /// `N1 = 1`, `N2` even squarefree.
    EvenSquarefreeSquare,
    /// `N1 = 1`, `N2/4` odd squarefree.
    FourTimesOddSquarefree,
    /// `N1 = 2`, `N2` squarefree.
    TwiceSquarefreeSquare,
    /// `N1 = 3`, `N2` squarefree.
    ThriceSquarefreeSquare,
    None,
}

/// Which row of the `ε` table applies; `ε` vanishes for every other level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EpsilonBranch {
    /// `N1 = 1`, `N2` odd squarefree.
    OddSquarefreeSquare,
    /// `N1 = 1`, `N2/4` odd squarefree.
    FourTimesOddSquarefree,
    /// `N1 ∈ {2, 3}`, `N2` squarefree.
    SmallTimesSquarefreeSquare,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corrections {
    pub xi0: Rational,
    pub xi0_branch: Xi0Branch,
    pub eps: i64,
    pub eps_branch: EpsilonBranch,
    /// `δ_{k=2} (δ_{N2=1} + ε(N))`.
    pub delta_k2_term: i64,
}

impl Corrections {
    /// The full correction `ξ(N,k)`.
    pub fn xi(&self) -> Rational {
        &self.xi0 + self.delta_k2_term
    }
}

fn four_times_odd_squarefree(n2: u64) -> Option<Factorization> {
    if n2 % 8 != 4 {
        return None;
    }
    let q = crate::arith::factor(n2 / 4).ok()?;
    q.is_squarefree().then_some(q)
}

pub(crate) fn xi0_branch(dec: &LevelDecomposition) -> Xi0Branch {
    let n2f = dec.n2_factorization();
    let sqfree = n2f.is_squarefree();
    match dec.n1 {
        1 if sqfree && dec.n2 % 2 == 1 => Xi0Branch::OddSquarefreeSquare,
        1 if sqfree => Xi0Branch::EvenSquarefreeSquare,
        1 if four_times_odd_squarefree(dec.n2).is_some() => Xi0Branch::FourTimesOddSquarefree,
        2 if sqfree => Xi0Branch::TwiceSquarefreeSquare,
        3 if sqfree => Xi0Branch::ThriceSquarefreeSquare,
        _ => Xi0Branch::None,
    }
}

pub fn correction_terms(n: u64, k: u32) -> Result<Corrections> {
    check_weight(k)?;
    let dec = decompose_level(n)?;
    let s = sign_k(k);
    let n2f = dec.n2_factorization();
    let mu_n2 = n2f.mobius();
    let tr = |m: u64| -> Rational { Rational::from_integer(small_level_trace(m, k).expect("level <= 4")) };
    let quarter = Rational::new(s, 4);
    let half = Rational::new(s, 2);

    let branch = xi0_branch(&dec);
    let (xi0, eps_branch, eps) = match branch {
        Xi0Branch::OddSquarefreeSquare => {
            ((tr(1) - &quarter) * mu_n2, EpsilonBranch::OddSquarefreeSquare, -mu_n2)
        }
        Xi0Branch::EvenSquarefreeSquare => ((tr(1) - tr(4) + &quarter) * mu_n2, EpsilonBranch::Zero, 0),
        Xi0Branch::FourTimesOddSquarefree => {
            // N2/2 = 2·(odd squarefree), so μ(N2/2) = -μ(N2/4).
            let mu_half = -four_times_odd_squarefree(dec.n2).expect("branch guard").mobius();
            ((tr(4) - &half) * mu_half, EpsilonBranch::FourTimesOddSquarefree, -mu_half)
        }
        Xi0Branch::TwiceSquarefreeSquare => {
            ((tr(2) - &half) * mu_n2, EpsilonBranch::SmallTimesSquarefreeSquare, -mu_n2)
        }
        Xi0Branch::ThriceSquarefreeSquare => {
            ((tr(3) - Rational::new(2 * s, 3)) * mu_n2, EpsilonBranch::SmallTimesSquarefreeSquare, -mu_n2)
        }
        Xi0Branch::None => (Rational::ZERO, EpsilonBranch::Zero, 0),
    };
    let delta_k2_term = if k == 2 { i64::from(dec.n2 == 1) + eps } else { 0 };
    Ok(Corrections { xi0, xi0_branch: branch, eps, eps_branch, delta_k2_term })
}

/// `ξ(N,k)`.
pub fn correction_xi(n: u64, k: u32) -> Result<Rational> {
    Ok(correction_terms(n, k)?.xi())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(correction_xi(37, 4).unwrap(), Rational::ZERO);

        let c = correction_terms(9, 10).unwrap();
        assert_eq!(c.xi0_branch, Xi0Branch::OddSquarefreeSquare);
        assert_eq!(c.xi0, Rational::new(-1, 4));
        assert_eq!(c.xi(), Rational::new(-1, 4));

        // N = 4: N1 = 1, N2 = 2 even squarefree, where ε vanishes.
        let c = correction_terms(4, 2).unwrap();
        assert_eq!(c.xi0_branch, Xi0Branch::EvenSquarefreeSquare);
        assert_eq!(c.eps_branch, EpsilonBranch::Zero);
        assert_eq!(c.xi0, Rational::new(1, 4));
        assert_eq!(c.eps, 0);
        assert_eq!(c.xi(), Rational::new(1, 4));
    }

    #[test]
    fn branch_routing() {
        let b = |n| xi0_branch(&decompose_level(n).unwrap());
        assert_eq!(b(1), Xi0Branch::OddSquarefreeSquare);
        assert_eq!(b(225), Xi0Branch::OddSquarefreeSquare);
        assert_eq!(b(4), Xi0Branch::EvenSquarefreeSquare);
        assert_eq!(b(36), Xi0Branch::EvenSquarefreeSquare);
        assert_eq!(b(16), Xi0Branch::FourTimesOddSquarefree);
        assert_eq!(b(144), Xi0Branch::FourTimesOddSquarefree);
        assert_eq!(b(64), Xi0Branch::None);
        assert_eq!(b(8), Xi0Branch::TwiceSquarefreeSquare);
        assert_eq!(b(12), Xi0Branch::ThriceSquarefreeSquare);
        assert_eq!(b(5), Xi0Branch::None);
        assert_eq!(b(81), Xi0Branch::None);
    }
}
