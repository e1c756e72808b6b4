//! Exact integer and rational kernels plus decisive comparison against
//! transcendental bound expressions.

mod bound;
mod dyadic;
mod interval;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub use bound::{cmp_bound, BoundExpr, DEFAULT_PRECISION_CAP, DEFAULT_START_BITS};
pub use dyadic::{Dyadic, Round};
pub use interval::{EvalFailure, Interval};

pub type ExactInt = BigInt;
pub type ExactRat = BigRational;

/// Binomial coefficient C(k, x), zero outside `0..=k`.
pub fn binom(k: u64, x: i64) -> ExactInt {
    if x < 0 || x as u64 > k {
        return BigInt::zero();
    }
    let x = (x as u64).min(k - x as u64);
    let mut acc = BigInt::one();
    for i in 0..x {
        acc *= k - i;
        acc /= i + 1;
    }
    acc
}

/// P[Bin(k) = x] = C(k, x) / 2^k.
pub fn binom_pmf(k: u64, x: i64) -> ExactRat {
    BigRational::new(binom(k, x), BigInt::one() << k)
}

/// Natural log of a positive big integer as f64, valid beyond the f64 range.
pub fn ln_big(v: &BigInt) -> f64 {
    let bits = v.bits();
    let shift = bits.saturating_sub(64);
    let top = (v >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Formats an exact rational as `num/den`, always with an explicit denominator.
pub fn rat_string(q: &ExactRat) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `num/den` or a bare integer.
pub fn parse_rat(s: &str) -> Option<ExactRat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            (!d.is_zero()).then(|| BigRational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}
