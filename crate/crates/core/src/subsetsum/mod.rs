//! Subset-sum profiles of an integer weight vector: concentration ρ(w), the
//! range R(w), the Lévy concentration function, and fibers of the sum map.

mod cube;
mod profile;

use std::f64::consts::LN_2;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

pub use cube::{CubeSet, MAX_CUBE_DIM};
pub use profile::{fiber, profile, profile_dp, profile_mitm, profile_naive, unique_preimages};

use crate::error::{Error, Result};
use crate::numerics::{ln_big, rat_string};

/// Integer weight vector, `n >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weights(Vec<BigInt>);

impl Weights {
    pub fn new(entries: Vec<BigInt>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::BadParams("weight vector must be nonempty".into()));
        }
        Ok(Weights(entries))
    }

    pub fn from_i64(entries: &[i64]) -> Result<Self> {
        Weights::new(entries.iter().map(|&v| BigInt::from(v)).collect())
    }

    /// Clears denominators by their least common multiple.
    pub fn from_rationals(entries: &[BigRational]) -> Result<Self> {
        let lcm = entries
            .iter()
            .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        Weights::new(
            entries
                .iter()
                .map(|q| q.numer() * (&lcm / q.denom()))
                .collect(),
        )
    }

    /// Parses comma-separated integers or `num/den` rationals.
    pub fn parse(text: &str) -> Result<Self> {
        let parsed: Option<Vec<BigRational>> =
            text.split(',').map(crate::numerics::parse_rat).collect();
        match parsed {
            Some(v) => Weights::from_rationals(&v),
            None => Err(Error::BadParams(format!("cannot parse weights {text:?}"))),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.0
    }

    /// Sum of negative entries and sum of positive entries.
    pub fn sum_bounds(&self) -> (BigInt, BigInt) {
        let mut lo = BigInt::zero();
        let mut hi = BigInt::zero();
        for w in &self.0 {
            if w.is_negative() {
                lo += w;
            } else {
                hi += w;
            }
        }
        (lo, hi)
    }

    /// Renders entries joined by `sep`.
    pub fn join(&self, sep: &str) -> String {
        self.0
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(sep)
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.join(","))
    }
}

/// Size limits for the profile algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Largest n for full 2^n enumeration.
    pub naive: usize,
    /// Largest sum-range width for the DP table.
    pub dp: u128,
    /// Largest n for meet-in-the-middle.
    pub mitm: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            naive: 24,
            dp: 10_000_000,
            mitm: 48,
        }
    }
}

/// Exact multiset of the 2^n subset sums.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumProfile {
    n: usize,
    entries: Vec<(BigInt, BigUint)>,
}

impl SumProfile {
    /// Checks the profile invariants: strictly increasing sums, positive
    /// counts summing to 2^n.
    pub fn new(n: usize, entries: Vec<(BigInt, BigUint)>) -> Result<Self> {
        if !entries.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(Error::InvariantViolated(
                "profile sums not strictly increasing".into(),
            ));
        }
        if entries.iter().any(|(_, c)| c.is_zero()) {
            return Err(Error::InvariantViolated("zero count in profile".into()));
        }
        let total: BigUint = entries.iter().map(|(_, c)| c).sum();
        if total != BigUint::one() << n {
            return Err(Error::InvariantViolated(format!(
                "profile counts sum to {total}, expected 2^{n}"
            )));
        }
        Ok(SumProfile { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(BigInt, BigUint)] {
        &self.entries
    }

    pub fn range_size(&self) -> usize {
        self.entries.len()
    }

    pub fn count(&self, sum: &BigInt) -> BigUint {
        match self.entries.binary_search_by(|(s, _)| s.cmp(sum)) {
            Ok(i) => self.entries[i].1.clone(),
            Err(_) => BigUint::zero(),
        }
    }

    /// Largest fiber size and the smallest sum attaining it.
    pub fn max_fiber(&self) -> (&BigInt, &BigUint) {
        let mut best = &self.entries[0];
        for e in &self.entries[1..] {
            if e.1 > best.1 {
                best = e;
            }
        }
        (&best.0, &best.1)
    }
}

/// ρ(w), its witness τ, |R(w)|, and the exponents ε = ln(1/ρ)/n, δ = ln|R|/n.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub n: usize,
    pub rho: BigRational,
    pub tau: BigInt,
    pub max_count: BigUint,
    pub range_size: BigUint,
    pub epsilon: f64,
    pub delta: f64,
}

impl ConcentrationReport {
    /// |R| * ρ >= 1, checked in integers: |R| * max_count >= 2^n.
    pub fn satisfies_trivial_bound(&self) -> bool {
        &self.range_size * &self.max_count >= BigUint::one() << self.n
    }
}

pub fn concentration(p: &SumProfile) -> ConcentrationReport {
    let n = p.n();
    let (tau, max_count) = p.max_fiber();
    let rho = BigRational::new(BigInt::from(max_count.clone()), BigInt::one() << n);
    let range_size = BigUint::from(p.range_size());
    let nf = n as f64;
    // ln(2^n / max_count) / n, exact multiples of ln 2 when max_count is a
    // power of two so that |R| * ρ = 1 gives δ == ε bit for bit
    let epsilon = if is_pow2(max_count) {
        (n as u64 - (max_count.bits() - 1)) as f64 * LN_2 / nf
    } else {
        (nf * LN_2 - ln_big(&BigInt::from(max_count.clone()))) / nf
    };
    let delta = if is_pow2(&range_size) {
        (range_size.bits() - 1) as f64 * LN_2 / nf
    } else {
        (p.range_size() as f64).ln() / nf
    };
    ConcentrationReport {
        n,
        rho,
        tau: tau.clone(),
        max_count: max_count.clone(),
        range_size,
        epsilon,
        delta,
    }
}

fn is_pow2(v: &BigUint) -> bool {
    !v.is_zero() && v.count_ones() == 1
}

/// The Lévy concentration function at radius `r`: the largest probability
/// mass inside a closed window of width 2r, with the window center.
///
/// Among windows of equal mass the one starting at the smallest sum wins.
pub fn levy(p: &SumProfile, r: &BigRational) -> Result<(BigRational, BigRational)> {
    if r.is_negative() {
        return Err(Error::BadParams("levy radius must be nonnegative".into()));
    }
    let width = r * BigRational::from_integer(2.into());
    let sums: Vec<BigRational> = p
        .entries()
        .iter()
        .map(|(s, _)| BigRational::from_integer(s.clone()))
        .collect();
    let counts = p.entries().iter().map(|(_, c)| c);
    let counts: Vec<&BigUint> = counts.collect();
    let mut best: Option<(BigUint, usize, usize)> = None;
    let mut window = BigUint::zero();
    let mut hi = 0;
    for lo in 0..sums.len() {
        while hi < sums.len() && &sums[hi] - &sums[lo] <= width {
            window += counts[hi];
            hi += 1;
        }
        if best.as_ref().is_none_or(|(b, _, _)| window > *b) {
            best = Some((window.clone(), lo, hi - 1));
        }
        window -= counts[lo];
    }
    let (mass, lo, hi) = best.expect("profile is nonempty");
    let tau = (&sums[lo] + &sums[hi]) / BigRational::from_integer(2.into());
    let prob = BigRational::new(BigInt::from(mass), BigInt::one() << p.n());
    Ok((tau, prob))
}

/// Serializable view of a report with exact values as strings.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ReportRecord {
    pub n: usize,
    pub rho: String,
    pub tau: String,
    pub range: String,
    pub epsilon: f64,
    pub delta: f64,
}

impl From<&ConcentrationReport> for ReportRecord {
    fn from(r: &ConcentrationReport) -> Self {
        ReportRecord {
            n: r.n,
            rho: rat_string(&r.rho),
            tau: r.tau.to_string(),
            range: r.range_size.to_string(),
            epsilon: r.epsilon,
            delta: r.delta,
        }
    }
}
