//! Certified decisions about real numbers presented as enclosure generators.
//!
//! A `RealSource` produces, on demand, a ball containing its value at any
//! requested precision.  The drivers below query sources at the precisions of
//! a `PrecisionPolicy` ladder until the resulting enclosures separate, so a
//! returned ordering, sign, bool or floor is a proof, never a guess.

use num_bigint::BigInt;
use num_rational::BigRational;
use std::cmp::Ordering;

use super::ball::Ball;
use super::dyadic::Dyadic;
use super::policy::PrecisionPolicy;
use crate::error::{Error, Result};

pub trait RealSource {
    /// An enclosure of the value, sharp to roughly `prec` bits.
    fn eval(&self, prec: u32) -> Result<Ball>;
    /// Short human-readable description for error contexts.
    fn describe(&self) -> String;
    /// The value itself when it is known to be an exact rational.  Lets
    /// consumers that work on rational intervals skip the dyadic rounding
    /// a `Ball` would force on values like 22/7.
    fn exact_rational(&self) -> Option<BigRational> {
        None
    }
}

/// A source built from a closure.
pub struct FnSource<F: Fn(u32) -> Result<Ball>> {
    f: F,
    label: String,
}

impl<F: Fn(u32) -> Result<Ball>> FnSource<F> {
    pub fn new(label: impl Into<String>, f: F) -> Self {
        FnSource { f, label: label.into() }
    }
}

impl<F: Fn(u32) -> Result<Ball>> RealSource for FnSource<F> {
    fn eval(&self, prec: u32) -> Result<Ball> {
        (self.f)(prec)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// An exact constant as a source.
pub struct ConstSource(pub Dyadic);

impl RealSource for ConstSource {
    fn eval(&self, prec: u32) -> Result<Ball> {
        Ok(Ball::exact(self.0.clone(), prec))
    }

    fn describe(&self) -> String {
        self.0.approx_decimal(10)
    }

    fn exact_rational(&self) -> Option<BigRational> {
        Some(self.0.to_rational())
    }
}

/// An exact rational constant as a source.
pub struct RationalSource(pub BigRational);

impl RealSource for RationalSource {
    fn eval(&self, prec: u32) -> Result<Ball> {
        Ok(Ball::from_rational(&self.0, prec))
    }

    fn describe(&self) -> String {
        self.0.to_string()
    }

    fn exact_rational(&self) -> Option<BigRational> {
        Some(self.0.clone())
    }
}

/// Certified three-way comparison of two sources.
pub fn certified_compare(a: &dyn RealSource, b: &dyn RealSource, policy: &PrecisionPolicy) -> Result<Ordering> {
    policy.run(|prec| {
        let ba = a.eval(prec)?;
        let bb = b.eval(prec)?;
        ba.try_cmp(&bb).ok_or_else(|| Error::NotSeparated {
            context: format!("compare {} vs {}: {} vs {}", a.describe(), b.describe(), ba, bb),
        })
    })
}

/// Certified `a <= b`; both answers are proofs.
pub fn certified_le(a: &dyn RealSource, b: &dyn RealSource, policy: &PrecisionPolicy) -> Result<bool> {
    policy.run(|prec| {
        let ba = a.eval(prec)?;
        let bb = b.eval(prec)?;
        ba.try_le(&bb).ok_or_else(|| Error::NotSeparated {
            context: format!("decide {} <= {}: {} vs {}", a.describe(), b.describe(), ba, bb),
        })
    })
}

/// Certified strict `a < b`.
pub fn certified_lt(a: &dyn RealSource, b: &dyn RealSource, policy: &PrecisionPolicy) -> Result<bool> {
    Ok(matches!(certified_compare(a, b, policy)?, Ordering::Less))
}

/// Certified sign of a source.
pub fn certified_sign(a: &dyn RealSource, policy: &PrecisionPolicy) -> Result<i8> {
    policy.run(|prec| {
        let ba = a.eval(prec)?;
        ba.try_sign().ok_or_else(|| Error::NotSeparated {
            context: format!("sign of {}: {}", a.describe(), ba),
        })
    })
}

/// Certified floor of a source.  Decidable exactly when both enclosure
/// endpoints eventually fall in the same unit interval (or the enclosure
/// becomes an exact integer point).
pub fn certified_floor(a: &dyn RealSource, policy: &PrecisionPolicy) -> Result<BigInt> {
    policy.run(|prec| {
        let ba = a.eval(prec)?;
        let lo = ba.lo().floor_int();
        let hi = ba.hi().floor_int();
        if lo == hi {
            Ok(lo)
        } else if ba.is_exact() && ba.mid().is_integer() {
            Ok(ba.mid().floor_int())
        } else {
            Err(Error::NotSeparated {
                context: format!("floor of {}: {}", a.describe(), ba),
            })
        }
    })
}
