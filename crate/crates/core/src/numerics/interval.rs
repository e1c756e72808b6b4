//! Outward-rounded intervals over [`Dyadic`] endpoints, with enclosures of
//! pi, exp, ln and sqrt at a requested working precision.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::One;

use super::dyadic::{Dyadic, Round};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

/// Failure to produce an enclosure at the current precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalFailure {
    /// The argument certainly lies outside the function's domain.
    Domain(String),
    /// The argument interval straddles a domain boundary; more precision may help.
    Imprecise,
}

impl Interval {
    pub fn point(d: Dyadic) -> Self {
        Interval {
            lo: d.clone(),
            hi: d,
        }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        Interval {
            lo: Dyadic::from_rational(q, prec, Round::Down),
            hi: Dyadic::from_rational(q, prec, Round::Up),
        }
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        self.lo.cmp_rational(q).is_le() && self.hi.cmp_rational(q).is_ge()
    }

    pub fn width(&self) -> BigRational {
        self.hi.to_rational() - self.lo.to_rational()
    }

    pub fn add(&self, o: &Interval, prec: u32) -> Interval {
        Interval {
            lo: self.lo.add(&o.lo).round(prec, Round::Down),
            hi: self.hi.add(&o.hi).round(prec, Round::Up),
        }
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn mul(&self, o: &Interval, prec: u32) -> Interval {
        let products = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = products.iter().min().expect("nonempty").clone();
        let hi = products.iter().max().expect("nonempty").clone();
        Interval {
            lo: lo.round(prec, Round::Down),
            hi: hi.round(prec, Round::Up),
        }
    }

    pub fn powi(&self, exp: u32, prec: u32) -> Interval {
        if exp == 0 {
            return Interval::point(Dyadic::from_int(1));
        }
        let straddles = self.lo.sign() == Sign::Minus && self.hi.sign() != Sign::Minus;
        if straddles && exp % 2 == 0 {
            let m = if self.lo.neg() > self.hi {
                self.lo.neg()
            } else {
                self.hi.clone()
            };
            let top = Interval::point(m).powi(exp, prec);
            return Interval {
                lo: Dyadic::zero(),
                hi: top.hi,
            };
        }
        if self.lo.sign() == Sign::Minus && self.hi.sign() == Sign::Minus {
            let p = self.neg().powi(exp, prec);
            return if exp % 2 == 0 { p } else { p.neg() };
        }
        // monotone on the remaining cases (nonnegative, or odd power)
        let mut lo = Dyadic::from_int(1);
        let mut hi = Dyadic::from_int(1);
        for _ in 0..exp {
            lo = lo.mul(&self.lo).round(prec, Round::Down);
            hi = hi.mul(&self.hi).round(prec, Round::Up);
        }
        Interval { lo, hi }
    }

    pub fn recip(&self, prec: u32) -> Result<Interval, EvalFailure> {
        let lo_sign = self.lo.sign();
        let hi_sign = self.hi.sign();
        if lo_sign == Sign::NoSign && hi_sign == Sign::NoSign {
            return Err(EvalFailure::Domain("reciprocal of zero".into()));
        }
        if lo_sign != Sign::Plus && hi_sign != Sign::Minus {
            return Err(EvalFailure::Imprecise);
        }
        let one = Dyadic::from_int(1);
        Ok(Interval {
            lo: one.div(&self.hi, prec, Round::Down),
            hi: one.div(&self.lo, prec, Round::Up),
        })
    }

    pub fn exp(&self, prec: u32) -> Interval {
        Interval {
            lo: exp_bounds(&self.lo, prec).0,
            hi: exp_bounds(&self.hi, prec).1,
        }
    }

    pub fn ln(&self, prec: u32) -> Result<Interval, EvalFailure> {
        if self.hi.sign() != Sign::Plus {
            return Err(EvalFailure::Domain(
                "logarithm of a nonpositive value".into(),
            ));
        }
        if self.lo.sign() != Sign::Plus {
            return Err(EvalFailure::Imprecise);
        }
        Ok(Interval {
            lo: ln_bounds(&self.lo, prec).0,
            hi: ln_bounds(&self.hi, prec).1,
        })
    }

    pub fn sqrt(&self, prec: u32) -> Result<Interval, EvalFailure> {
        if self.hi.sign() == Sign::Minus {
            return Err(EvalFailure::Domain(
                "square root of a negative value".into(),
            ));
        }
        if self.lo.sign() == Sign::Minus {
            return Err(EvalFailure::Imprecise);
        }
        Ok(Interval {
            lo: sqrt_bound(&self.lo, prec, Round::Down),
            hi: sqrt_bound(&self.hi, prec, Round::Up),
        })
    }

    pub fn pi(prec: u32) -> Interval {
        static CACHE: OnceLock<Mutex<HashMap<u32, Interval>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(iv) = cache.lock().expect("pi cache poisoned").get(&prec) {
            return iv.clone();
        }
        let iv = pi_bounds(prec);
        cache
            .lock()
            .expect("pi cache poisoned")
            .insert(prec, iv.clone());
        iv
    }
}

fn tiny(wp: u32) -> i64 {
    -(wp as i64) - 4
}

/// Lower and upper bounds on exp(x).
fn exp_bounds(x: &Dyadic, prec: u32) -> (Dyadic, Dyadic) {
    match x.sign() {
        Sign::NoSign => (Dyadic::from_int(1), Dyadic::from_int(1)),
        Sign::Minus => {
            let (lo, hi) = exp_bounds(&x.neg(), prec + 4);
            let one = Dyadic::from_int(1);
            (
                one.div(&hi, prec, Round::Down),
                one.div(&lo, prec, Round::Up),
            )
        }
        Sign::Plus => {
            // y = x / 2^r < 1/2
            let r = (x.log2_floor() + 2).max(0);
            let y = x.mul_pow2(-r);
            let wp = prec + r as u32 + 32;
            let mut lo_sum = Dyadic::from_int(1);
            let mut hi_sum = Dyadic::from_int(1);
            let mut t_lo = Dyadic::from_int(1);
            let mut t_hi = Dyadic::from_int(1);
            let mut j: i64 = 1;
            loop {
                let jd = Dyadic::from_int(j);
                t_lo = t_lo.mul(&y).div(&jd, wp, Round::Down);
                t_hi = t_hi.mul(&y).div(&jd, wp, Round::Up);
                lo_sum = lo_sum.add(&t_lo).round(wp, Round::Down);
                hi_sum = hi_sum.add(&t_hi).round(wp, Round::Up);
                if t_hi.is_zero() || t_hi.log2_floor() < tiny(wp) {
                    break;
                }
                j += 1;
            }
            // tail after term j is at most t_j since y < 1/2
            hi_sum = hi_sum.add(&t_hi).round(wp, Round::Up);
            for _ in 0..r {
                lo_sum = lo_sum.mul(&lo_sum).round(wp, Round::Down);
                hi_sum = hi_sum.mul(&hi_sum).round(wp, Round::Up);
            }
            (lo_sum, hi_sum)
        }
    }
}

/// sum_{j>=0} z^(2j+1)/(2j+1) for 0 <= z <= 1/2, bounded in direction `dir`.
fn atanh_series(z: &Dyadic, wp: u32, dir: Round) -> Dyadic {
    if z.is_zero() {
        return Dyadic::zero();
    }
    let z2 = z.mul(z).round(wp, dir);
    let mut power = z.clone();
    let mut sum = Dyadic::zero();
    let mut j: i64 = 0;
    loop {
        let term = power.div(&Dyadic::from_int(2 * j + 1), wp, dir);
        sum = sum.add(&term).round(wp, dir);
        if term.is_zero() || term.log2_floor() < tiny(wp) {
            if dir == Round::Up {
                // tail is below term * z^2 / (1 - z^2) <= term / 3
                sum = sum.add(&term).round(wp, Round::Up);
            }
            return sum;
        }
        power = power.mul(&z2).round(wp, dir);
        j += 1;
    }
}

fn ln2_bounds(wp: u32) -> (Dyadic, Dyadic) {
    let third_lo = Dyadic::from_int(1).div(&Dyadic::from_int(3), wp, Round::Down);
    let third_hi = Dyadic::from_int(1).div(&Dyadic::from_int(3), wp, Round::Up);
    (
        atanh_series(&third_lo, wp, Round::Down).mul_pow2(1),
        atanh_series(&third_hi, wp, Round::Up).mul_pow2(1),
    )
}

/// Lower and upper bounds on ln(x), x > 0.
fn ln_bounds(x: &Dyadic, prec: u32) -> (Dyadic, Dyadic) {
    let e = x.log2_floor();
    let wp = prec + 32 + (64 - e.unsigned_abs().leading_zeros());
    let m = x.mul_pow2(-e);
    let one = Dyadic::from_int(1);
    let num = m.add(&one.neg());
    let den = m.add(&one);
    let z_lo = num.div(&den, wp, Round::Down);
    let z_hi = num.div(&den, wp, Round::Up);
    let lnm_lo = atanh_series(&z_lo, wp, Round::Down).mul_pow2(1);
    let lnm_hi = atanh_series(&z_hi, wp, Round::Up).mul_pow2(1);
    let (l2_lo, l2_hi) = ln2_bounds(wp);
    let ed = Dyadic::from_int(e);
    let (e_lo, e_hi) = if e >= 0 {
        (ed.mul(&l2_lo), ed.mul(&l2_hi))
    } else {
        (ed.mul(&l2_hi), ed.mul(&l2_lo))
    };
    (
        e_lo.add(&lnm_lo).round(prec, Round::Down),
        e_hi.add(&lnm_hi).round(prec, Round::Up),
    )
}

fn sqrt_bound(x: &Dyadic, prec: u32, dir: Round) -> Dyadic {
    if x.is_zero() {
        return Dyadic::zero();
    }
    let q = x.to_rational();
    // x = num / 2^k exactly
    let num = q.numer().clone();
    let k = q.denom().bits() as i64 - 1;
    let mut shift = (2 * prec as i64 + 4 - num.bits() as i64).max(0);
    if (k + shift) % 2 != 0 {
        shift += 1;
    }
    let scaled: BigInt = num << shift as u64;
    let mut root = scaled.sqrt();
    if dir == Round::Up && &root * &root != scaled {
        root += 1;
    }
    Dyadic::new(root, -(k + shift) / 2)
}

/// atan(1/q) bounds for integer q >= 2 via the alternating series.
fn atan_recip_bounds(q: u32, wp: u32) -> (Dyadic, Dyadic) {
    let qq = BigInt::from(q) * BigInt::from(q);
    let mut qpow = BigInt::from(q);
    let mut lo = Dyadic::zero();
    let mut hi = Dyadic::zero();
    let mut j: i64 = 0;
    loop {
        let den = Dyadic::from_int(&qpow * BigInt::from(2 * j + 1));
        let one = Dyadic::from_int(1);
        let m_lo = one.div(&den, wp, Round::Down);
        let m_hi = one.div(&den, wp, Round::Up);
        if j % 2 == 0 {
            lo = lo.add(&m_lo).round(wp, Round::Down);
            hi = hi.add(&m_hi).round(wp, Round::Up);
        } else {
            lo = lo.add(&m_hi.neg()).round(wp, Round::Down);
            hi = hi.add(&m_lo.neg()).round(wp, Round::Up);
        }
        if m_hi.log2_floor() < tiny(wp) {
            // alternating tail bounded by the last magnitude
            lo = lo.add(&m_hi.neg()).round(wp, Round::Down);
            hi = hi.add(&m_hi).round(wp, Round::Up);
            return (lo, hi);
        }
        qpow *= &qq;
        j += 1;
    }
}

fn pi_bounds(prec: u32) -> Interval {
    // pi = 16 atan(1/5) - 4 atan(1/239)
    let wp = prec + 16;
    let (a_lo, a_hi) = atan_recip_bounds(5, wp);
    let (b_lo, b_hi) = atan_recip_bounds(239, wp);
    let lo = a_lo.mul_pow2(4).add(&b_hi.mul_pow2(2).neg());
    let hi = a_hi.mul_pow2(4).add(&b_lo.mul_pow2(2).neg());
    Interval {
        lo: lo.round(prec, Round::Down),
        hi: hi.round(prec, Round::Up),
    }
}

impl Interval {
    /// Exact rational interval as a pair, for diagnostics.
    pub fn bounds(&self) -> (BigRational, BigRational) {
        (self.lo.to_rational(), self.hi.to_rational())
    }

    pub fn midpoint_f64(&self) -> f64 {
        (self.lo.to_f64() + self.hi.to_f64()) / 2.0
    }

    pub fn is_point_one(&self) -> bool {
        self.lo == self.hi && self.lo.to_rational().is_one()
    }
}
