//! Exhaustive sweeps over small canonical weight vectors, mapping the
//! attained (ε, δ) pairs and auditing δ >= ε.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::subsetsum::{concentration, profile, Caps, ConcentrationReport, Weights};

pub const DEFAULT_SWEEP_BUDGET: u128 = 1_000_000_000;

/// Sorted ascending, signs dropped, divided by the gcd of nonzero entries.
pub fn canonicalize(w: &Weights) -> Weights {
    let mut v: Vec<BigInt> = w.entries().iter().map(|x| x.abs()).collect();
    v.sort();
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    Weights::new(v).expect("nonempty input")
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub weights: Weights,
    pub report: ConcentrationReport,
}

impl FrontierPoint {
    pub fn epsilon(&self) -> f64 {
        self.report.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.report.delta
    }

    pub fn rho(&self) -> &BigRational {
        &self.report.rho
    }

    pub fn range_size(&self) -> &BigUint {
        &self.report.range_size
    }

    /// δ/ε, defined as 1 when ε = 0 (only w = 0, where δ = 0 as well).
    pub fn delta_over_eps(&self) -> f64 {
        if self.report.epsilon == 0.0 {
            1.0
        } else {
            self.report.delta / self.report.epsilon
        }
    }

    /// δ / sqrt(max(ε, 1/n^2)).
    pub fn delta_over_sqrt_eps(&self) -> f64 {
        let n = self.report.n as f64;
        self.report.delta / self.report.epsilon.max(1.0 / (n * n)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub n: usize,
    pub max_weight: u64,
    pub workers: usize,
    pub budget: u128,
    pub caps: Caps,
}

impl SweepConfig {
    pub fn new(n: usize, max_weight: u64) -> Self {
        SweepConfig {
            n,
            max_weight,
            workers: 1,
            budget: DEFAULT_SWEEP_BUDGET,
            caps: Caps::default(),
        }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Nondecreasing vectors over `0..=max` with gcd of nonzero entries 1 (or
/// all zero), in lexicographic order.
pub fn canonical_vectors(n: usize, max: u64) -> Vec<Vec<u64>> {
    fn rec(prefix: &mut Vec<u64>, n: usize, max: u64, out: &mut Vec<Vec<u64>>) {
        if prefix.len() == n {
            let g = prefix.iter().fold(0u64, |g, &x| g.gcd(&x));
            if g <= 1 {
                out.push(prefix.clone());
            }
            return;
        }
        let start = prefix.last().copied().unwrap_or(0);
        for v in start..=max {
            prefix.push(v);
            rec(prefix, n, max, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), n, max, &mut out);
    out
}

fn check_sweep(cfg: &SweepConfig) -> Result<()> {
    if cfg.n == 0 {
        return Err(Error::BadParams("sweep needs n >= 1".into()));
    }
    if cfg.workers == 0 {
        return Err(Error::BadParams("sweep needs at least one worker".into()));
    }
    let space = (0..cfg.n).try_fold(1u128, |acc, _| acc.checked_mul(cfg.max_weight as u128 + 1));
    match space {
        Some(s) if s <= cfg.budget => Ok(()),
        other => Err(Error::BudgetExceeded {
            what: "sweep space (max_weight+1)^n",
            needed: other.unwrap_or(u128::MAX),
            budget: cfg.budget,
        }),
    }
}

/// Every canonical vector of the sweep with its concentration report, in
/// lexicographic order of weights.
///
/// Candidates are split into fixed-size chunks evaluated on a pool of
/// `cfg.workers` threads; the output order never depends on scheduling.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<FrontierPoint>> {
    check_sweep(cfg)?;
    let candidates = canonical_vectors(cfg.n, cfg.max_weight);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::BadParams(format!("thread pool: {e}")))?;
    let caps = cfg.caps;
    let chunks: Vec<Result<Vec<FrontierPoint>>> = pool.install(|| {
        candidates
            .par_chunks(256)
            .map(|chunk| {
                chunk
                    .iter()
                    .map(|v| {
                        let weights = Weights::new(v.iter().map(|&x| BigInt::from(x)).collect())?;
                        let report = concentration(&profile(&weights, &caps)?);
                        Ok(FrontierPoint { weights, report })
                    })
                    .collect()
            })
            .collect()
    });
    let mut out = Vec::with_capacity(candidates.len());
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Points maximizing δ at each attained ε (ties all kept), in the input's
/// order.
pub fn pareto(points: &[FrontierPoint]) -> Vec<FrontierPoint> {
    // ε is determined by ρ, δ by |R|; compare exactly
    let mut best: BTreeMap<&BigRational, &BigUint> = BTreeMap::new();
    for p in points {
        let slot = best.entry(p.rho()).or_insert(p.range_size());
        if p.range_size() > *slot {
            *slot = p.range_size();
        }
    }
    points
        .iter()
        .filter(|p| best[p.rho()] == p.range_size())
        .cloned()
        .collect()
}

/// The Pareto-maximal points of an exhaustive sweep.
pub fn enumerate_frontier(cfg: &SweepConfig) -> Result<Vec<FrontierPoint>> {
    Ok(pareto(&sweep(cfg)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub points: usize,
    pub max_delta_over_eps: f64,
    pub argmax_delta_over_eps: Weights,
    pub max_delta_over_sqrt_eps: f64,
    pub argmax_delta_over_sqrt_eps: Weights,
    /// Points with δ > 2ε; reported only.
    pub above_two_eps: usize,
    pub first_above_two_eps: Option<Weights>,
    pub constant: f64,
    /// Points with δ <= C sqrt(ε) (ε clamped at 1/n^2).
    pub within_constant: usize,
}

/// Asserts δ >= ε (as |R| ρ >= 1, exactly) on every point and summarizes the
/// exponent ratios.
pub fn audit(points: &[FrontierPoint], constant: f64) -> Result<AuditReport> {
    let first = points
        .first()
        .ok_or_else(|| Error::BadParams("audit needs at least one point".into()))?;
    let mut report = AuditReport {
        points: points.len(),
        max_delta_over_eps: f64::NEG_INFINITY,
        argmax_delta_over_eps: first.weights.clone(),
        max_delta_over_sqrt_eps: f64::NEG_INFINITY,
        argmax_delta_over_sqrt_eps: first.weights.clone(),
        above_two_eps: 0,
        first_above_two_eps: None,
        constant,
        within_constant: 0,
    };
    for p in points {
        if !p.report.satisfies_trivial_bound() {
            return Err(Error::InvariantViolated(format!(
                "|R| * rho < 1 for w = {}: |R| = {}, rho = {}",
                p.weights,
                p.range_size(),
                p.rho()
            )));
        }
        let r = p.delta_over_eps();
        if r > report.max_delta_over_eps {
            report.max_delta_over_eps = r;
            report.argmax_delta_over_eps = p.weights.clone();
        }
        let s = p.delta_over_sqrt_eps();
        if s > report.max_delta_over_sqrt_eps {
            report.max_delta_over_sqrt_eps = s;
            report.argmax_delta_over_sqrt_eps = p.weights.clone();
        }
        if p.delta() > 2.0 * p.epsilon() {
            report.above_two_eps += 1;
            report
                .first_above_two_eps
                .get_or_insert_with(|| p.weights.clone());
        }
        if s <= constant {
            report.within_constant += 1;
        }
    }
    Ok(report)
}

/// Formats a float with 12 significant digits in positional notation.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    } else {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    }
    out
}

pub const CSV_HEADER: &str =
    "n,weights,rho_num,rho_den,range_size,epsilon,delta,delta_over_eps,delta_over_sqrt_eps";

pub fn csv_row(p: &FrontierPoint) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        p.weights.len(),
        p.weights.join(";"),
        p.rho().numer(),
        p.rho().denom(),
        p.range_size(),
        sig12(p.epsilon()),
        sig12(p.delta()),
        sig12(p.delta_over_eps()),
        sig12(p.delta_over_sqrt_eps()),
    )
}

pub fn write_csv<W: Write>(points: &[FrontierPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for p in points {
        writeln!(out, "{}", csv_row(p))?;
    }
    Ok(())
}

/// Two-column `epsilon delta` rows for gnuplot.
pub fn write_plot_data<W: Write>(points: &[FrontierPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "# epsilon delta")?;
    for p in points {
        writeln!(out, "{} {}", sig12(p.epsilon()), sig12(p.delta()))?;
    }
    Ok(())
}
