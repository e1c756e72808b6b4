use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::interval::{EvalFailure, Interval};
use crate::error::{Error, Result};

pub const DEFAULT_START_BITS: u32 = 128;
pub const DEFAULT_PRECISION_CAP: u32 = 4096;

/// Symbolic real-valued expression that can be enclosed in an interval at
/// any precision.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundExpr {
    Const(BigRational),
    Pi,
    Add(Box<BoundExpr>, Box<BoundExpr>),
    Mul(Box<BoundExpr>, Box<BoundExpr>),
    Neg(Box<BoundExpr>),
    Pow(Box<BoundExpr>, u32),
    Exp(Box<BoundExpr>),
    Ln(Box<BoundExpr>),
    Sqrt(Box<BoundExpr>),
}

impl BoundExpr {
    pub fn rat(q: BigRational) -> Self {
        BoundExpr::Const(q)
    }

    pub fn int(v: impl Into<BigInt>) -> Self {
        BoundExpr::Const(BigRational::from_integer(v.into()))
    }

    pub fn frac(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        BoundExpr::Const(BigRational::new(num.into(), den.into()))
    }

    /// Exact conversion of a finite float.
    pub fn float(x: f64) -> Self {
        BoundExpr::Const(BigRational::from_float(x).expect("finite float"))
    }

    pub fn pi() -> Self {
        BoundExpr::Pi
    }

    pub fn exp(self) -> Self {
        BoundExpr::Exp(Box::new(self))
    }

    pub fn ln(self) -> Self {
        BoundExpr::Ln(Box::new(self))
    }

    pub fn sqrt(self) -> Self {
        BoundExpr::Sqrt(Box::new(self))
    }

    pub fn pow(self, exp: u32) -> Self {
        BoundExpr::Pow(Box::new(self), exp)
    }

    /// The exact value when the expression is rational without approximation.
    pub fn exact(&self) -> Option<BigRational> {
        match self {
            BoundExpr::Const(q) => Some(q.clone()),
            BoundExpr::Pi => None,
            BoundExpr::Add(a, b) => Some(a.exact()? + b.exact()?),
            BoundExpr::Mul(a, b) => Some(a.exact()? * b.exact()?),
            BoundExpr::Neg(a) => Some(-a.exact()?),
            BoundExpr::Pow(a, e) => Some(num_traits::pow(a.exact()?, *e as usize)),
            BoundExpr::Exp(a) => {
                let v = a.exact()?;
                v.is_zero().then(BigRational::one)
            }
            BoundExpr::Ln(a) => {
                let v = a.exact()?;
                v.is_one().then(BigRational::zero)
            }
            BoundExpr::Sqrt(a) => {
                let v = a.exact()?;
                if v.is_negative() {
                    return None;
                }
                let n = v.numer().sqrt();
                let d = v.denom().sqrt();
                (&n * &n == *v.numer() && &d * &d == *v.denom()).then(|| BigRational::new(n, d))
            }
        }
    }

    pub fn eval(&self, prec: u32) -> std::result::Result<Interval, EvalFailure> {
        Ok(match self {
            BoundExpr::Const(q) => Interval::from_rational(q, prec),
            BoundExpr::Pi => Interval::pi(prec),
            BoundExpr::Add(a, b) => a.eval(prec)?.add(&b.eval(prec)?, prec),
            BoundExpr::Mul(a, b) => a.eval(prec)?.mul(&b.eval(prec)?, prec),
            BoundExpr::Neg(a) => a.eval(prec)?.neg(),
            BoundExpr::Pow(a, e) => a.eval(prec)?.powi(*e, prec),
            BoundExpr::Exp(a) => a.eval(prec)?.exp(prec),
            BoundExpr::Ln(a) => a.eval(prec)?.ln(prec)?,
            BoundExpr::Sqrt(a) => a.eval(prec)?.sqrt(prec)?,
        })
    }

    /// Midpoint of a 64-bit enclosure; for reporting only.
    pub fn approx(&self) -> f64 {
        match self.eval(64) {
            Ok(iv) => iv.midpoint_f64(),
            Err(_) => f64::NAN,
        }
    }
}

impl Add for BoundExpr {
    type Output = BoundExpr;
    fn add(self, rhs: BoundExpr) -> BoundExpr {
        BoundExpr::Add(Box::new(self), Box::new(rhs))
    }
}

impl Mul for BoundExpr {
    type Output = BoundExpr;
    fn mul(self, rhs: BoundExpr) -> BoundExpr {
        BoundExpr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl Neg for BoundExpr {
    type Output = BoundExpr;
    fn neg(self) -> BoundExpr {
        BoundExpr::Neg(Box::new(self))
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundExpr::Const(q) => write!(f, "{q}"),
            BoundExpr::Pi => write!(f, "pi"),
            BoundExpr::Add(a, b) => write!(f, "({a} + {b})"),
            BoundExpr::Mul(a, b) => write!(f, "{a}*{b}"),
            BoundExpr::Neg(a) => write!(f, "-{a}"),
            BoundExpr::Pow(a, e) => write!(f, "{a}^{e}"),
            BoundExpr::Exp(a) => write!(f, "exp({a})"),
            BoundExpr::Ln(a) => write!(f, "ln({a})"),
            BoundExpr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

/// Decides the ordering of `q` against the real value of `expr`.
///
/// Rational expressions are compared exactly. Otherwise the expression is
/// enclosed at 128 bits and the precision doubles until the enclosure
/// excludes `q`; reaching `cap_bits` without separation yields
/// [`Error::Undecidable`].
pub fn cmp_bound(q: &BigRational, expr: &BoundExpr, cap_bits: u32) -> Result<Ordering> {
    if let Some(v) = expr.exact() {
        return Ok(q.cmp(&v));
    }
    let mut prec = DEFAULT_START_BITS.min(cap_bits.max(1));
    loop {
        match expr.eval(prec) {
            Ok(iv) => {
                if iv.lo.cmp_rational(q).is_gt() {
                    return Ok(Ordering::Less);
                }
                if iv.hi.cmp_rational(q).is_lt() {
                    return Ok(Ordering::Greater);
                }
            }
            Err(EvalFailure::Domain(msg)) => return Err(Error::Domain(msg)),
            Err(EvalFailure::Imprecise) => {}
        }
        if prec >= cap_bits {
            return Err(Error::Undecidable { bits: prec });
        }
        prec = (prec * 2).min(cap_bits);
    }
}
