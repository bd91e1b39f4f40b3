//! Midpoint-radius interval arithmetic over exact dyadics.
//!
//! A `Ball` encloses one real number: the true value lies in
//! `[mid - rad, mid + rad]`, always.  Midpoints are truncated to the ball's
//! working precision and every truncation is folded into the radius, so the
//! enclosure survives arbitrary compositions.  Radii are rounded up to a
//! 32-bit mantissa; they only ever grow by rounding.
//!
//! Comparisons never guess: `try_cmp`, `try_le` and `try_sign` return `None`
//! when the enclosures overlap, and the precision policy layer escalates.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::dyadic::Dyadic;
use super::functions::{exp_point, ln_point};
use crate::error::{Error, Result};

/// Mantissa bits kept in radii.
pub const RAD_BITS: u32 = 32;

#[derive(Clone, Debug)]
pub struct Ball {
    mid: Dyadic,
    rad: Dyadic,
    prec: u32,
}

impl Ball {
    /// Ball with explicitly given midpoint and radius, re-rounded to `prec`.
    pub fn new(mid: Dyadic, rad: Dyadic, prec: u32) -> Self {
        assert!(!rad.is_negative(), "negative radius");
        Ball { mid, rad, prec }.rounded()
    }

    /// Exact point ball (zero radius).
    pub fn exact(mid: Dyadic, prec: u32) -> Self {
        Ball { mid, rad: Dyadic::zero(), prec }
    }

    pub fn from_int(v: &BigInt, prec: u32) -> Self {
        Ball::exact(Dyadic::from_bigint(v.clone()), prec).rounded()
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Ball::exact(Dyadic::from_i64(v), prec)
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        let (mid, err) = Dyadic::from_rational_trunc(r, prec);
        Ball { mid, rad: err, prec }.rounded()
    }

    /// Ball spanning exactly `[lo, hi]`.
    pub fn from_endpoints(lo: &Dyadic, hi: &Dyadic, prec: u32) -> Self {
        debug_assert!(lo.cmp_val(hi) != Ordering::Greater, "endpoints out of order");
        let mid = lo.add(hi).mul_pow2(-1);
        let rad = hi.sub(lo).mul_pow2(-1);
        Ball { mid, rad, prec }.rounded()
    }

    pub fn zero(prec: u32) -> Self {
        Ball::exact(Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> Self {
        Ball::exact(Dyadic::one(), prec)
    }

    pub fn mid(&self) -> &Dyadic {
        &self.mid
    }

    pub fn rad(&self) -> &Dyadic {
        &self.rad
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    /// Exact lower endpoint `mid - rad`.
    pub fn lo(&self) -> Dyadic {
        self.mid.sub(&self.rad)
    }

    /// Exact upper endpoint `mid + rad`.
    pub fn hi(&self) -> Dyadic {
        self.mid.add(&self.rad)
    }

    /// Truncate the midpoint to `prec` bits and absorb the truncation error
    /// (plus radius rounding) into the radius.
    fn rounded(self) -> Self {
        let (mid, err) = self.mid.trunc_bits(self.prec);
        let rad = self.rad.add(&err).round_up_mag(RAD_BITS);
        Ball { mid, rad, prec: self.prec }
    }

    /// Same enclosure viewed at a different working precision.
    pub fn with_prec(&self, prec: u32) -> Self {
        Ball { mid: self.mid.clone(), rad: self.rad.clone(), prec }.rounded()
    }

    pub fn neg(&self) -> Self {
        Ball { mid: self.mid.neg(), rad: self.rad.clone(), prec: self.prec }
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        Ball {
            mid: self.mid.add(&other.mid),
            rad: self.rad.add(&other.rad),
            prec,
        }
        .rounded()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec.max(other.prec);
        let mid = self.mid.mul(&other.mid);
        let rad = self
            .mid
            .abs()
            .mul(&other.rad)
            .add(&other.mid.abs().mul(&self.rad))
            .add(&self.rad.mul(&other.rad));
        Ball { mid, rad, prec }.rounded()
    }

    pub fn mul_pow2(&self, e: i64) -> Self {
        Ball {
            mid: self.mid.mul_pow2(e),
            rad: self.rad.mul_pow2(e),
            prec: self.prec,
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        let mid = self.mid.mul_int(k);
        let rad = self.rad.mul_int(&k.magnitude().clone().into());
        Ball { mid, rad, prec: self.prec }.rounded()
    }

    /// 1 / self.  Fails with a retryable error when the enclosure contains
    /// zero, so policy loops can sharpen the denominator first.
    pub fn recip(&self) -> Result<Self> {
        if self.is_exact() && self.mid.is_zero() {
            return Err(Error::Domain("reciprocal of exact zero".into()));
        }
        if self.lo().is_positive() || self.hi().is_negative() {
            // d = mid^2 - rad^2 > 0; the exact image of the interval under
            // 1/z is [1/(mid+rad), 1/(mid-rad)] = (mid -+ rad) / d.
            let d = self.mid.mul(&self.mid).sub(&self.rad.mul(&self.rad));
            let (mid, err) = self.mid.div_trunc(&d, self.prec);
            let rad = self.rad.div_up(&d, RAD_BITS).add(&err);
            Ok(Ball { mid, rad, prec: self.prec }.rounded())
        } else {
            Err(Error::NotSeparated {
                context: format!("reciprocal of an enclosure containing zero: {self}"),
            })
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.recip()?))
    }

    /// Integer power by binary exponentiation.  Exponent zero gives the
    /// exact value one for every base, including enclosures of zero.
    pub fn powi(&self, e: i64) -> Result<Self> {
        if e == 0 {
            return Ok(Ball::one(self.prec));
        }
        let mut base = self.clone();
        let mut n = e.unsigned_abs();
        let mut acc = Ball::one(self.prec);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        if e < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }

    /// Natural log.  Requires a strictly positive enclosure; an enclosure
    /// that merely straddles zero yields a retryable error, one that is
    /// entirely non-positive a hard domain error.
    pub fn ln(&self) -> Result<Self> {
        let lo = self.lo();
        if !lo.is_positive() {
            if self.hi().is_positive() {
                return Err(Error::NotSeparated {
                    context: format!("log of an enclosure straddling zero: {self}"),
                });
            }
            return Err(Error::Domain(format!("log of a non-positive enclosure: {self}")));
        }
        let (pmid, prad) = ln_point(&self.mid, self.prec)?;
        // |ln z - ln mid| <= rad / lo on [lo, hi]
        let spread = if self.rad.is_zero() {
            Dyadic::zero()
        } else {
            self.rad.div_up(&lo, RAD_BITS)
        };
        let rad = prad.add(&spread);
        Ball { mid: pmid, rad, prec: self.prec }.rounded_ok()
    }

    /// Exponential.  `|exp z - exp mid| <= exp(hi) * rad` on the enclosure.
    pub fn exp(&self) -> Result<Self> {
        if self.is_exact() && self.mid.is_zero() {
            return Ok(Ball::one(self.prec));
        }
        let (pmid, prad) = exp_point(&self.mid, self.prec)?;
        let spread = if self.rad.is_zero() {
            Dyadic::zero()
        } else {
            // crude but safe upper bound on exp over the whole enclosure
            let (umid, urad) = exp_point(&self.hi(), 32)?;
            let upper = umid.add(&urad);
            upper.mul(&self.rad).round_up_mag(RAD_BITS)
        };
        let rad = prad.add(&spread);
        Ball { mid: pmid, rad, prec: self.prec }.rounded_ok()
    }

    /// Rational power `self^(num/den)` via exp((num/den) ln self).
    pub fn pow_ratio(&self, num: &BigInt, den: &BigInt) -> Result<Self> {
        if num.sign() == num_bigint::Sign::NoSign {
            return Ok(Ball::one(self.prec));
        }
        let q = Ball::from_rational(&BigRational::new(num.clone(), den.clone()), self.prec);
        self.ln()?.mul(&q).exp()
    }

    /// Absolute value; straddling enclosures collapse to `[0, max endpoint]`.
    pub fn abs(&self) -> Self {
        let lo = self.lo();
        let hi = self.hi();
        if !lo.is_negative() {
            self.clone()
        } else if !hi.is_positive() {
            self.neg()
        } else {
            let m = lo.abs().max(hi);
            Ball {
                mid: m.mul_pow2(-1),
                rad: m.mul_pow2(-1),
                prec: self.prec,
            }
            .rounded()
        }
    }

    fn rounded_ok(self) -> Result<Self> {
        Ok(self.rounded())
    }

    /// Certified three-way comparison; `None` when the enclosures overlap
    /// without being the same exact point.
    /// Enclosure of `max(x, y)` over all x in self, y in other: the
    /// endpoint-wise maximum (max is monotone in both arguments).
    pub fn max_hull(&self, other: &Self) -> Self {
        let lo = std::cmp::max_by(self.lo(), other.lo(), |a, b| a.cmp_val(b));
        let hi = std::cmp::max_by(self.hi(), other.hi(), |a, b| a.cmp_val(b));
        Ball::from_endpoints(&lo, &hi, self.prec.max(other.prec))
    }

    pub fn try_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.hi() < other.lo() {
            return Some(Ordering::Less);
        }
        if self.lo() > other.hi() {
            return Some(Ordering::Greater);
        }
        if self.is_exact() && other.is_exact() && self.mid == other.mid {
            return Some(Ordering::Equal);
        }
        None
    }

    /// Certified `<=`; `Some(true)` and `Some(false)` are both proofs.
    pub fn try_le(&self, other: &Self) -> Option<bool> {
        if self.hi() <= other.lo() {
            return Some(true);
        }
        if self.lo() > other.hi() {
            return Some(false);
        }
        None
    }

    /// Certified sign: +1, -1, or 0 (exact zero only).
    pub fn try_sign(&self) -> Option<i8> {
        if self.lo().is_positive() {
            Some(1)
        } else if self.hi().is_negative() {
            Some(-1)
        } else if self.is_exact() && self.mid.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo().is_positive() && !self.hi().is_negative()
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        self.lo().to_rational() <= *q && *q <= self.hi().to_rational()
    }

    pub fn contains_dyadic(&self, d: &Dyadic) -> bool {
        self.lo() <= *d && *d <= self.hi()
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rad.is_zero() {
            write!(f, "[{} exactly]", self.mid.approx_decimal(12))
        } else {
            write!(f, "[{} +- {}]", self.mid.approx_decimal(12), self.rad.approx_decimal(3))
        }
    }
}
