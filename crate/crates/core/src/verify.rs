//! Grid verification of every closed form against its independent oracle.
//!
//! The formulas under test are passed in as a [`Formulas`] table so that a
//! harness can substitute a deliberately broken implementation and confirm
//! the report localizes it.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::arith::{decompose_level, Rational};
use crate::classnum::{
    h_prime, h_prime_scaled, h_prime_scaled_mobius, hurwitz, hurwitz_via_conductors, hurwitz_via_relation,
    Discriminant,
};
use crate::error::Result;
use crate::trace::{self, correction_terms, CaseTag, EpsilonBranch, Xi0Branch};

type TraceFn = fn(u64, u32) -> Result<i64>;

/// The implementations checked against each other.
#[derive(Clone, Copy)]
pub struct Formulas {
    pub trace_full_closed: TraceFn,
    pub trace_full_direct: TraceFn,
    pub trace_new_closed: TraceFn,
    pub trace_new_mobius: TraceFn,
}

impl Default for Formulas {
    fn default() -> Self {
        Formulas {
            trace_full_closed: trace::trace_full_closed,
            trace_full_direct: trace::trace_full_direct,
            trace_new_closed: trace::trace_new_closed,
            trace_new_mobius: trace::trace_new_mobius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    /// Closed full-space trace against the direct class number sum.
    FullTrace,
    /// Closed newspace trace against Möbius inversion.
    NewTrace,
    /// `tr W_N = Σ_{Q | N2} tr W_{N/Q²}^new`.
    Roundtrip,
    /// Hurwitz class number: enumeration, divisor sum of `h'`, and the
    /// `σ`-weighted relation.
    Hurwitz,
    /// `h'` of a non-fundamental discriminant: enumeration against both
    /// conductor formulas.
    ScaledClassNumber,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::FullTrace => "full-trace",
            Check::NewTrace => "new-trace",
            Check::Roundtrip => "roundtrip",
            Check::Hurwitz => "hurwitz",
            Check::ScaledClassNumber => "scaled-class-number",
        })
    }
}

/// One failed comparison. For trace checks `(a, b) = (N, k)`; for class
/// number checks `(a, b) = (-D, λ)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mismatch {
    pub check: Check,
    pub a: i64,
    pub b: i64,
    pub left: String,
    pub right: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (la, lb) = match self.check {
            Check::Hurwitz | Check::ScaledClassNumber => ("D", "lambda"),
            _ => ("N", "k"),
        };
        write!(f, "{} {la}={} {lb}={}: {} != {}", self.check, self.a, self.b, self.left, self.right)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub grid_points: u64,
    pub class_number_points: u64,
    pub mismatches: Vec<Mismatch>,
    pub cases_hit: BTreeSet<CaseTag>,
    pub xi0_hit: BTreeSet<Xi0Branch>,
    pub eps_hit: BTreeSet<EpsilonBranch>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// Newspace cases, `ξ0` rows and `ε` rows that no grid point reached.
    pub fn missing_branches(&self) -> Vec<String> {
        let cases = [
            CaseTag::Generic,
            CaseTag::SquareOddRoot,
            CaseTag::SquareEvenRoot,
            CaseTag::SquareTwiceEven,
            CaseTag::TwiceSquare,
            CaseTag::ThriceSquare,
        ];
        let xi0 = [
            Xi0Branch::OddSquarefreeSquare,
            Xi0Branch::EvenSquarefreeSquare,
            Xi0Branch::FourTimesOddSquarefree,
            Xi0Branch::TwiceSquarefreeSquare,
            Xi0Branch::ThriceSquarefreeSquare,
            Xi0Branch::None,
        ];
        let eps = [
            EpsilonBranch::OddSquarefreeSquare,
            EpsilonBranch::FourTimesOddSquarefree,
            EpsilonBranch::SmallTimesSquarefreeSquare,
            EpsilonBranch::Zero,
        ];
        let mut out = Vec::new();
        out.extend(cases.iter().filter(|c| !self.cases_hit.contains(c)).map(|c| format!("case {c}")));
        out.extend(xi0.iter().filter(|b| !self.xi0_hit.contains(b)).map(|b| format!("xi0 {b:?}")));
        out.extend(eps.iter().filter(|b| !self.eps_hit.contains(b)).map(|b| format!("eps {b:?}")));
        out
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.mismatches {
            writeln!(f, "MISMATCH {m}")?;
        }
        let cases: Vec<&str> = self.cases_hit.iter().map(|c| c.as_str()).collect();
        writeln!(f, "cases hit: {}", cases.join(","))?;
        let missing = self.missing_branches();
        if !missing.is_empty() {
            writeln!(f, "branches not reached: {}", missing.join(", "))?;
        }
        write!(
            f,
            "{}: {} grid points, {} class number points, {} mismatches",
            if self.passed() { "PASS" } else { "FAIL" },
            self.grid_points,
            self.class_number_points,
            self.mismatches.len()
        )
    }
}

fn render(r: &Result<i64>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("error({e})"),
    }
}

fn compare(out: &mut Vec<Mismatch>, check: Check, a: i64, b: i64, left: Result<i64>, right: Result<i64>) {
    let same = matches!((&left, &right), (Ok(x), Ok(y)) if x == y);
    if !same {
        out.push(Mismatch { check, a, b, left: render(&left), right: render(&right) });
    }
}

fn compare_rational(out: &mut Vec<Mismatch>, check: Check, a: i64, b: i64, values: [Result<Rational>; 3]) {
    let text: Vec<String> = values
        .iter()
        .map(|v| match v {
            Ok(r) => r.to_string(),
            Err(e) => format!("error({e})"),
        })
        .collect();
    if values.iter().any(|v| v.is_err()) || text[0] != text[1] || text[0] != text[2] {
        out.push(Mismatch { check, a, b, left: text[0].clone(), right: format!("{} / {}", text[1], text[2]) });
    }
}

#[derive(Default)]
struct Partial {
    mismatches: Vec<Mismatch>,
    cases: BTreeSet<CaseTag>,
    xi0: BTreeSet<Xi0Branch>,
    eps: BTreeSet<EpsilonBranch>,
}

fn check_level(f: &Formulas, n: u64, k_max: u32) -> Partial {
    let mut p = Partial::default();
    let dec = match decompose_level(n) {
        Ok(d) => d,
        Err(e) => {
            p.mismatches.push(Mismatch {
                check: Check::Roundtrip,
                a: n as i64,
                b: 0,
                left: format!("error({e})"),
                right: String::new(),
            });
            return p;
        }
    };
    p.cases.insert(trace::level_case(&dec));
    let sub_levels: Vec<u64> = dec.n2_factorization().divisors().into_iter().map(|q| n / (q * q)).collect();
    for k in (2..=k_max).step_by(2) {
        let (a, b) = (n as i64, k as i64);
        let closed = (f.trace_full_closed)(n, k);
        compare(&mut p.mismatches, Check::FullTrace, a, b, closed.clone(), (f.trace_full_direct)(n, k));
        compare(&mut p.mismatches, Check::NewTrace, a, b, (f.trace_new_closed)(n, k), (f.trace_new_mobius)(n, k));
        let summed: Result<i64> = sub_levels.iter().map(|&m| (f.trace_new_closed)(m, k)).sum();
        compare(&mut p.mismatches, Check::Roundtrip, a, b, summed, closed);
        if let Ok(c) = correction_terms(n, k) {
            p.xi0.insert(c.xi0_branch);
            p.eps.insert(c.eps_branch);
        }
    }
    p
}

/// All fundamental discriminants `-D` with `D ≤ bound`, ascending in `D`.
pub fn fundamental_discriminants(bound: u64) -> Vec<i64> {
    (3..=bound as i64).map(|d| -d).filter(|&d| Discriminant::fundamental(d).is_ok()).collect()
}

fn check_discriminant(d: i64, bound: u64) -> (u64, Vec<Mismatch>) {
    let mut out = Vec::new();
    let mut points = 0;
    let fund = Discriminant::fundamental(d).expect("caller passes fundamental discriminants");
    let dabs = d.unsigned_abs();
    let mut lambda = 1u64;
    while lambda * lambda * dabs <= bound {
        points += 1;
        let scaled = fund.scaled(lambda);
        let (a, b) = (d, lambda as i64);
        compare_rational(
            &mut out,
            Check::Hurwitz,
            a,
            b,
            [
                scaled.clone().and_then(hurwitz),
                hurwitz_via_conductors(fund, lambda),
                hurwitz_via_relation(fund, lambda),
            ],
        );
        compare_rational(
            &mut out,
            Check::ScaledClassNumber,
            a,
            b,
            [scaled.and_then(h_prime), h_prime_scaled(fund, lambda), h_prime_scaled_mobius(fund, lambda)],
        );
        lambda += 1;
    }
    (points, out)
}

/// Checks the class number relations for every fundamental `-D` and `λ` with
/// `λ² D ≤ bound`.
pub fn verify_class_numbers(bound: u64) -> (u64, Vec<Mismatch>) {
    let per: Vec<(u64, Vec<Mismatch>)> =
        fundamental_discriminants(bound).into_par_iter().map(|d| check_discriminant(d, bound)).collect();
    let points = per.iter().map(|(p, _)| p).sum();
    let mut mismatches: Vec<Mismatch> = per.into_iter().flat_map(|(_, m)| m).collect();
    mismatches.sort();
    (points, mismatches)
}

/// Runs every trace comparison over `1 ≤ N ≤ n_max`, even `2 ≤ k ≤ k_max`,
/// plus the class number relations up to `class_bound`, on `jobs` threads
/// (`0` means all cores). The report is independent of `jobs`.
pub fn verify_grid(
    formulas: &Formulas,
    n_max: u64,
    k_max: u32,
    class_bound: u64,
    jobs: usize,
) -> std::result::Result<VerifyReport, rayon::ThreadPoolBuildError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(|| {
        let partials: Vec<Partial> = (1..=n_max).into_par_iter().map(|n| check_level(formulas, n, k_max)).collect();
        let mut report = VerifyReport {
            grid_points: n_max * u64::from(k_max / 2),
            ..VerifyReport::default()
        };
        for p in partials {
            report.mismatches.extend(p.mismatches);
            report.cases_hit.extend(p.cases);
            report.xi0_hit.extend(p.xi0);
            report.eps_hit.extend(p.eps);
        }
        let (points, class_mismatches) = verify_class_numbers(class_bound);
        report.class_number_points = points;
        report.mismatches.extend(class_mismatches);
        report.mismatches.sort();
        report
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_passes() {
        let r = verify_grid(&Formulas::default(), 60, 16, 500, 2).unwrap();
        assert!(r.passed(), "{r}");
        assert_eq!(r.exit_code(), 0);
    }

    fn broken_beta(n: u64) -> Result<u8> {
        trace::beta(n).map(|b| if b == 2 { 3 } else { b })
    }

    #[test]
    fn broken_beta_is_localized() {
        let f = Formulas {
            trace_new_closed: |n, k| trace::trace_new_closed_with_beta(n, k, broken_beta),
            ..Formulas::default()
        };
        let r = verify_grid(&f, 30, 6, 0, 1).unwrap();
        assert_eq!(r.exit_code(), 1);
        // β(N) = 2 first occurs at N = 7.
        let first = &r.mismatches.iter().find(|m| m.check == Check::NewTrace).unwrap();
        assert_eq!(first.a, 7);
    }

    #[test]
    fn report_independent_of_jobs() {
        let a = verify_grid(&Formulas::default(), 40, 10, 200, 1).unwrap();
        let b = verify_grid(&Formulas::default(), 40, 10, 200, 3).unwrap();
        assert_eq!(a, b);
    }
}
