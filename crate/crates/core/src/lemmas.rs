//! Exact and sampled checks of the binomial ratio estimates, the block
//! construction, and the range-versus-concentration exponent relation.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{binom, binom_pmf, cmp_bound, BoundExpr};
use crate::subsetsum::{ConcentrationReport, CubeSet, Weights};

pub const DEFAULT_CONSTANT: f64 = 20.0;
pub const DEFAULT_SUP_RATIO_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Undecidable,
}

impl Verdict {
    fn from_le(ord: Result<Ordering>) -> Result<Verdict> {
        match ord {
            Ok(Ordering::Greater) => Ok(Verdict::Fails),
            Ok(_) => Ok(Verdict::Holds),
            Err(Error::Undecidable { .. }) => Ok(Verdict::Undecidable),
            Err(e) => Err(e),
        }
    }

    fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Undecidable => "undecidable",
        })
    }
}

fn rat(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// P[Bin(k) = x - a] / P[Bin(k) = x] for a single coordinate.
pub fn coordinate_ratio(x: u32, a: u8, k: u32) -> BigRational {
    assert!(x <= k, "x must lie in 0..=k");
    if a == 0 {
        BigRational::one()
    } else {
        rat(x, k + 1 - x)
    }
}

/// E_{x ~ Bin(k)} (x / (k+1-x))^s, exactly.
pub fn ratio_moment(k: u32, s: u32) -> BigRational {
    (0..=k)
        .map(|x| {
            num_traits::pow(coordinate_ratio(x, 1, k), s as usize) * binom_pmf(k as u64, x as i64)
        })
        .sum()
}

/// exp(10 pi s^2 / k) + 2 k^s (4/5)^k
pub fn initial_bound_rhs(k: u32, s: u32) -> BoundExpr {
    let exponent = BoundExpr::frac(10 * s as u64 * s as u64, k) * BoundExpr::pi();
    exponent.exp() + BoundExpr::int(2) * BoundExpr::int(k).pow(s) * BoundExpr::frac(4, 5).pow(k)
}

/// Whether 1 <= s <= k / (16 pi), decided exactly.
pub fn in_moment_hypothesis(k: u32, s: u32) -> bool {
    if s == 0 {
        return false;
    }
    // s <= k/(16 pi)  <=>  k/(16 s) >= pi; pi is irrational so never equal
    matches!(
        cmp_bound(&rat(k, 16 * s), &BoundExpr::pi(), 4096),
        Ok(Ordering::Greater)
    )
}

/// Largest s with 1 <= s <= k/(16 pi), or 0 when there is none.
pub fn max_hypothesis_s(k: u32) -> u32 {
    let mut s = 0;
    while in_moment_hypothesis(k, s + 1) {
        s += 1;
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentRecord {
    pub k: u32,
    pub s: u32,
    pub lhs: BigRational,
    pub rhs: BoundExpr,
    pub verdict: Verdict,
    pub in_hypothesis: bool,
}

/// Compares the exact ratio moment with exp(10 pi s^2/k) + 2 k^s (4/5)^k.
pub fn check_initial_bound(k: u32, s: u32, cap_bits: u32) -> Result<MomentRecord> {
    if k == 0 || s == 0 {
        return Err(Error::BadParams(
            "moment check needs k >= 1 and s >= 1".into(),
        ));
    }
    let lhs = ratio_moment(k, s);
    let rhs = initial_bound_rhs(k, s);
    let verdict = Verdict::from_le(cmp_bound(&lhs, &rhs, cap_bits))?;
    Ok(MomentRecord {
        k,
        s,
        lhs,
        rhs,
        verdict,
        in_hypothesis: in_moment_hypothesis(k, s),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondMomentRecord {
    pub k: u32,
    /// E[x^2 / (k+1-x)^2]
    pub lhs: BigRational,
    /// sum_{l<k} (l+1)/(k-l) C(k,l) 2^-k
    pub sum_form: BigRational,
    /// (k+2)/k - (3k+4)/k 2^-k
    pub mid: BigRational,
    pub identity: bool,
    pub lower: bool,
    pub at_least_one: bool,
    pub verdict: Verdict,
}

/// The exact chain E[x^2/(k+1-x)^2] = sum form >= (k+2)/k - (3k+4)/k 2^-k >= 1.
pub fn second_moment_identity(k: u32) -> Result<SecondMomentRecord> {
    if k < 3 {
        return Err(Error::BadParams("second-moment chain needs k >= 3".into()));
    }
    let lhs = ratio_moment(k, 2);
    let sum_form: BigRational = (0..k)
        .map(|l| rat(l + 1, k - l) * binom_pmf(k as u64, l as i64))
        .sum();
    let mid = rat(k + 2, k) - rat(3 * k + 4, k) * rat(1, BigInt::one() << k);
    let identity = lhs == sum_form;
    let lower = sum_form >= mid;
    let at_least_one = mid >= BigRational::one();
    Ok(SecondMomentRecord {
        k,
        lhs,
        sum_form,
        mid,
        identity,
        lower,
        at_least_one,
        verdict: Verdict::from_bool(identity && lower && at_least_one),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailRecord {
    pub k: u32,
    pub tail: BigRational,
    pub rhs: BoundExpr,
    pub verdict: Verdict,
}

/// P[|x - k/2| >= k/3] for x ~ Bin(k), exactly.
pub fn binomial_tail(k: u32) -> BigRational {
    // |x - k/2| >= k/3  <=>  |6x - 3k| >= 2k
    let k64 = k as i64;
    (0..=k64)
        .filter(|&x| (6 * x - 3 * k64).abs() >= 2 * k64)
        .map(|x| binom_pmf(k as u64, x))
        .sum()
}

/// Checks P[|x - k/2| >= k/3] <= 2 (4/5)^k.
pub fn tail_check(k: u32, cap_bits: u32) -> Result<TailRecord> {
    if k == 0 {
        return Err(Error::BadParams("tail check needs k >= 1".into()));
    }
    let tail = binomial_tail(k);
    let rhs = BoundExpr::int(2) * BoundExpr::frac(4, 5).pow(k);
    let verdict = Verdict::from_le(cmp_bound(&tail, &rhs, cap_bits))?;
    Ok(TailRecord {
        k,
        tail,
        rhs,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxRatioRecord {
    pub k: u32,
    pub max: BigRational,
    pub argmax: u32,
    pub verdict: Verdict,
}

/// max over 0 <= l <= k of max{C(k,l-1), C(k,l)} / C(k,l), checked against k.
pub fn max_ratio_bound(k: u32) -> Result<MaxRatioRecord> {
    if k < 2 {
        return Err(Error::BadParams("max-ratio check needs k >= 2".into()));
    }
    let mut best = BigRational::zero();
    let mut argmax = 0;
    for l in 0..=k {
        let c = binom(k as u64, l as i64);
        let prev = binom(k as u64, l as i64 - 1);
        let r = BigRational::new(prev.max(c.clone()), c);
        if r > best {
            best = r;
            argmax = l;
        }
    }
    let verdict = Verdict::from_bool(best <= BigRational::from_integer(k.into()));
    Ok(MaxRatioRecord {
        k,
        max: best,
        argmax,
        verdict,
    })
}

fn decode_point(mut idx: u128, k: u32, n: usize) -> Vec<u32> {
    let base = k as u128 + 1;
    (0..n)
        .map(|_| {
            let d = (idx % base) as u32;
            idx /= base;
            d
        })
        .collect()
}

/// The likelihood-ratio supremum at x as num/den, both exact integers.
fn sup_ratio_at(x: &[u32], a: &CubeSet, k: u32) -> (BigUint, BigUint) {
    let mut best = (BigUint::zero(), BigUint::one());
    for &mask in a.members() {
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for (i, &xi) in x.iter().enumerate() {
            if CubeSet::bit(mask, i) == 1 {
                num *= xi;
                den *= k + 1 - xi;
            }
        }
        if &num * &best.1 > &best.0 * &den {
            best = (num, den);
        }
    }
    best
}

/// E_x[sup_{a in A} P[b = x - a] / P[b = x]] over x, b ~ Bin(k)^n, exactly.
///
/// Also checks the pointwise bound sup <= k^n at every x.
pub fn sup_ratio_exact(a: &CubeSet, k: u32, budget: u128) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::BadParams("sup-ratio needs k >= 1".into()));
    }
    let n = a.dim();
    let points = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(k as u128 + 1));
    let points = match points {
        Some(p) if p <= budget => p,
        other => {
            return Err(Error::BudgetExceeded {
                what: "sup-ratio grid (k+1)^n",
                needed: other.unwrap_or(u128::MAX),
                budget,
            })
        }
    };
    if a.is_empty() {
        return Ok(BigRational::zero());
    }
    // every denominator prod (k+1-x_i) divides lcm(1..=k)^n, since a_i = 1
    // with x_i = 0 contributes a zero numerator instead
    let lcm_k = (1..=k as u64).fold(BigUint::one(), |acc, v| acc.lcm(&BigUint::from(v)));
    let common = num_traits::pow(lcm_k, n);
    let cap = num_traits::pow(BigUint::from(k), n);
    let row: Vec<BigUint> = (0..=k)
        .map(|x| binom(k as u64, x as i64).to_biguint().expect("nonnegative"))
        .collect();
    const CHUNK: u128 = 4096;
    let chunks = points.div_ceil(CHUNK);
    let partials: Vec<Result<BigUint>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = BigUint::zero();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(points) {
                let x = decode_point(idx, k, n);
                let (num, den) = sup_ratio_at(&x, a, k);
                if num > &cap * &den {
                    return Err(Error::InvariantViolated(format!(
                        "sup-ratio integrand exceeds k^n at x = {x:?}"
                    )));
                }
                if num.is_zero() {
                    continue;
                }
                let weight: BigUint = x.iter().map(|&xi| &row[xi as usize]).product();
                acc += weight * num * (&common / den);
            }
            Ok(acc)
        })
        .collect();
    let mut total = BigUint::zero();
    for p in partials {
        total += p?;
    }
    let den = BigInt::from(common) << (k as u64 * n as u64);
    Ok(BigRational::new(total.into(), den))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupRatioEstimate {
    pub n: usize,
    pub k: u32,
    pub a_set_id: String,
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

/// Stable identifier for a cube set: FNV-1a over dimension and members.
pub fn set_id(a: &CubeSet) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |v: u64| {
        for byte in v.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    feed(a.dim() as u64);
    for &m in a.members() {
        feed(m);
    }
    format!("{:016x}", h)
}

/// Draws Bin(k) as the popcount of k fair bits.
fn draw_binomial(rng: &mut ChaCha8Rng, k: u32) -> u32 {
    let mut left = k;
    let mut total = 0;
    while left > 0 {
        let take = left.min(64);
        let word = rng.next_u64();
        let masked = if take == 64 {
            word
        } else {
            word & ((1u64 << take) - 1)
        };
        total += masked.count_ones();
        left -= take;
    }
    total
}

fn sup_ratio_f64(x: &[u32], a: &CubeSet, k: u32) -> f64 {
    a.members()
        .iter()
        .map(|&mask| {
            x.iter()
                .enumerate()
                .filter(|(i, _)| CubeSet::bit(mask, *i) == 1)
                .map(|(_, &xi)| xi as f64 / (k + 1 - xi) as f64)
                .product::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Monte Carlo estimate of the sup-ratio expectation.
///
/// Sample `i` draws from a ChaCha8 stream keyed by `(seed, i)`, and the
/// reduction runs in index order, so the result does not depend on how the
/// samples are scheduled across threads.
pub fn sup_ratio_mc(a: &CubeSet, k: u32, samples: u64, seed: u64) -> Result<SupRatioEstimate> {
    if samples == 0 {
        return Err(Error::BadParams("samples must be at least 1".into()));
    }
    let n = a.dim();
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let x: Vec<u32> = (0..n).map(|_| draw_binomial(&mut rng, k)).collect();
            sup_ratio_f64(&x, a, k)
        })
        .collect();
    let count = samples as f64;
    let mean = values.iter().sum::<f64>() / count;
    let std_error = if samples > 1 {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    Ok(SupRatioEstimate {
        n,
        k,
        a_set_id: set_id(a),
        mean,
        std_error,
        samples,
        exact: None,
    })
}

/// exp(C (1/k + sqrt(delta/k)) n) with delta = ln|A| / n.
pub fn sup_ratio_rhs(a_size: usize, n: usize, k: u32, constant: f64) -> BoundExpr {
    let delta_over_k = BoundExpr::int(a_size as u64).ln() * BoundExpr::frac(1, n as u64 * k as u64);
    let inner = BoundExpr::frac(1, k) + delta_over_k.sqrt();
    (BoundExpr::float(constant) * inner * BoundExpr::int(n as u64)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub enum SupRatioValue {
    Exact(BigRational),
    Sampled(SupRatioEstimate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupRatioReport {
    pub n: usize,
    pub k: u32,
    pub constant: f64,
    pub delta: f64,
    pub value: SupRatioValue,
    pub rhs: BoundExpr,
    /// ln(rhs) - ln(lhs); positive when the bound holds with room.
    pub log_margin: f64,
    pub verdict: Verdict,
}

/// How to evaluate the sup-ratio expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupRatioMode {
    Exact { budget: u128 },
    MonteCarlo { samples: u64, seed: u64 },
}

/// Compares the sup-ratio expectation with exp(C (1/k + sqrt(delta/k)) n).
///
/// In Monte Carlo mode the verdict is `Holds` when mean + 3 SE is below the
/// bound, `Fails` when mean - 3 SE is above it, and `Undecidable` otherwise.
pub fn check_sup_ratio_bound(
    a: &CubeSet,
    k: u32,
    constant: f64,
    mode: SupRatioMode,
    cap_bits: u32,
) -> Result<SupRatioReport> {
    if a.is_empty() {
        return Err(Error::BadParams("sup-ratio bound needs |A| >= 1".into()));
    }
    if !constant.is_finite() {
        return Err(Error::BadParams("constant must be finite".into()));
    }
    let n = a.dim();
    let rhs = sup_ratio_rhs(a.len(), n, k, constant);
    let rhs_ln = constant
        * (1.0 / k as f64 + ((a.len() as f64).ln() / n as f64 / k as f64).sqrt())
        * n as f64;
    let delta = (a.len() as f64).ln() / n as f64;
    let (value, verdict, lhs_f) = match mode {
        SupRatioMode::Exact { budget } => {
            let v = sup_ratio_exact(a, k, budget)?;
            let verdict = Verdict::from_le(cmp_bound(&v, &rhs, cap_bits))?;
            let f = v.to_f64().unwrap_or(f64::NAN);
            (SupRatioValue::Exact(v), verdict, f)
        }
        SupRatioMode::MonteCarlo { samples, seed } => {
            let est = sup_ratio_mc(a, k, samples, seed)?;
            let upper = BigRational::from_float(est.mean + 3.0 * est.std_error)
                .ok_or_else(|| Error::Domain("non-finite estimate".into()))?;
            let lower = BigRational::from_float(est.mean - 3.0 * est.std_error)
                .ok_or_else(|| Error::Domain("non-finite estimate".into()))?;
            let verdict = if cmp_bound(&upper, &rhs, cap_bits)? == Ordering::Less {
                Verdict::Holds
            } else if cmp_bound(&lower, &rhs, cap_bits)? == Ordering::Greater {
                Verdict::Fails
            } else {
                Verdict::Undecidable
            };
            let f = est.mean;
            (SupRatioValue::Sampled(est), verdict, f)
        }
    };
    Ok(SupRatioReport {
        n,
        k,
        constant,
        delta,
        value,
        rhs,
        log_margin: rhs_ln - lhs_f.ln(),
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockParams {
    pub n: usize,
    pub k: usize,
    pub weights: Weights,
}

fn check_block(n: usize, k: usize) -> Result<()> {
    if k == 0 || n == 0 || n % k != 0 {
        return Err(Error::BadParams(format!(
            "block construction needs k >= 1 dividing n >= 1, got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

/// n/k blocks of k equal weights, block i carrying (k+1)^(i-1).
///
/// Each block's partial sums 0..=k occupy their own base-(k+1) digit, so
/// blocks never interact.
pub fn block_construction(n: usize, k: usize) -> Result<BlockParams> {
    check_block(n, k)?;
    let base = BigInt::from(k + 1);
    let mut weights = Vec::with_capacity(n);
    let mut value = BigInt::one();
    for _ in 0..n / k {
        weights.extend(std::iter::repeat_n(value.clone(), k));
        value *= &base;
    }
    Ok(BlockParams {
        n,
        k,
        weights: Weights::new(weights)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockTheory {
    pub rho: BigRational,
    pub range: BigInt,
}

/// Closed forms ρ = (C(k, ⌊k/2⌋) / 2^k)^(n/k) and |R| = (k+1)^(n/k).
pub fn block_theory(n: usize, k: usize) -> Result<BlockTheory> {
    check_block(n, k)?;
    let blocks = n / k;
    let per_block = binom_pmf(k as u64, (k / 2) as i64);
    Ok(BlockTheory {
        rho: num_traits::pow(per_block, blocks),
        range: num_traits::pow(BigInt::from(k + 1), blocks),
    })
}

/// ln(k+1) / ln(2^k / C(k, ⌊k/2⌋)), the block construction's δ/ε.
pub fn block_exponent_ratio(k: usize) -> f64 {
    let c = binom(k as u64, (k / 2) as i64).to_f64().unwrap_or(f64::NAN);
    ((k + 1) as f64).ln() / (k as f64 * std::f64::consts::LN_2 - c.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremCheck {
    pub epsilon: f64,
    pub delta: f64,
    pub bound: f64,
    pub ratio: f64,
    pub holds: bool,
}

/// δ <= C sqrt(ε) with ε clamped below at 1/n^2.
pub fn theorem_check(rep: &ConcentrationReport, constant: f64) -> TheoremCheck {
    let n = rep.n as f64;
    let epsilon = rep.epsilon.max(1.0 / (n * n));
    let root = epsilon.sqrt();
    TheoremCheck {
        epsilon,
        delta: rep.delta,
        bound: constant * root,
        ratio: rep.delta / root,
        holds: rep.delta <= constant * root,
    }
}
