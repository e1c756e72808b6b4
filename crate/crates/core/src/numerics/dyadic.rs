//! Binary floating values with unbounded mantissa and explicit rounding direction.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

/// `mantissa * 2^exponent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

fn pow2(bits: u64) -> BigInt {
    BigInt::one() << bits
}

/// `num / den` rounded in the given direction, `den > 0`.
fn div_round(num: &BigInt, den: &BigInt, dir: Round) -> BigInt {
    let (q, r) = num.div_mod_floor(den);
    if dir == Round::Up && !r.is_zero() {
        q + 1
    } else {
        q
    }
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Dyadic {
            mantissa: v.into(),
            exponent: 0,
        }
        .normalized()
    }

    pub fn new(mantissa: BigInt, exponent: i64) -> Self {
        Dyadic { mantissa, exponent }.normalized()
    }

    fn normalized(mut self) -> Self {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return self;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mantissa >>= tz;
            self.exponent += tz as i64;
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn sign(&self) -> Sign {
        self.mantissa.sign()
    }

    /// Rounds a rational to `prec` significant bits.
    pub fn from_rational(q: &BigRational, prec: u32, dir: Round) -> Self {
        if q.numer().is_zero() {
            return Dyadic::zero();
        }
        let mag = q.numer().bits() as i64 - q.denom().bits() as i64;
        let shift = prec as i64 + 1 - mag;
        let (num, den) = if shift >= 0 {
            (q.numer() << shift as u64, q.denom().clone())
        } else {
            (q.numer().clone(), q.denom() << (-shift) as u64)
        };
        Dyadic::new(div_round(&num, &den, dir), -shift)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as u64)
        } else {
            BigRational::new(self.mantissa.clone(), pow2((-self.exponent) as u64))
        }
    }

    /// Keeps at most `prec` significant bits.
    pub fn round(self, prec: u32, dir: Round) -> Self {
        let bits = self.mantissa.bits();
        if bits <= prec as u64 {
            return self;
        }
        let drop = bits - prec as u64;
        let m = div_round(&self.mantissa, &pow2(drop), dir);
        Dyadic::new(m, self.exponent + drop as i64)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &other.mantissa << (other.exponent - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(
            &self.mantissa * &other.mantissa,
            self.exponent + other.exponent,
        )
    }

    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        Dyadic::new(self.mantissa.clone(), self.exponent + k)
    }

    /// `self / other` rounded to `prec` bits; `other` must be nonzero.
    pub fn div(&self, other: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        assert!(!other.is_zero(), "division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let (num, den) = if other.mantissa.is_negative() {
            (-&self.mantissa, -&other.mantissa)
        } else {
            (self.mantissa.clone(), other.mantissa.clone())
        };
        let shift = prec as u64 + den.bits() + 1;
        let q = div_round(&(num << shift), &den, dir);
        Dyadic::new(q, self.exponent - other.exponent - shift as i64)
    }

    /// Floor of log2 |self|, for nonzero values.
    pub fn log2_floor(&self) -> i64 {
        self.mantissa.bits() as i64 - 1 + self.exponent
    }

    pub fn cmp_rational(&self, q: &BigRational) -> Ordering {
        // mantissa * 2^e  vs  num / den
        let (lhs, rhs) = if self.exponent >= 0 {
            (
                (&self.mantissa << self.exponent as u64) * q.denom(),
                q.numer().clone(),
            )
        } else {
            (
                &self.mantissa * q.denom(),
                q.numer() << (-self.exponent) as u64,
            )
        };
        lhs.cmp(&rhs)
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.mantissa.bits();
        let drop = bits.saturating_sub(60);
        let m: i64 = (&self.mantissa >> drop).try_into().unwrap_or(0);
        let e = self.exponent + drop as i64;
        (m as f64) * 2f64.powi(e.clamp(-2000, 2000) as i32)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &other.mantissa << (other.exponent - e) as u64;
        a.cmp(&b)
    }
}
