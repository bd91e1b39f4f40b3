use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Exact dyadic rational `mant * 2^exp`.
///
/// All sums, differences and products are exact; only explicit rounding
/// operations (`trunc_bits`, `div_trunc`, ...) lose information, and those
/// return or guarantee an error bound so callers can account for it.  The
/// mantissa is kept odd (or zero) so equal values have equal representations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        if let Some(tz) = self.mant.trailing_zeros() {
            if tz > 0 {
                self.mant = shr_to_zero(&self.mant, tz);
                self.exp += tz as i64;
            }
        }
    }

    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic::from_i64(1)
    }

    pub fn from_i64(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Dyadic::new(v, 0)
    }

    /// 2^e as a dyadic.
    pub fn pow2(e: i64) -> Self {
        Dyadic { mant: BigInt::from(1), exp: e }
    }

    pub fn mant(&self) -> &BigInt {
        &self.mant
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    /// Bits in the mantissa.
    pub fn mant_bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Smallest `e` with `|self| < 2^e`, i.e. `|self| ∈ [2^(e-1), 2^e)`.
    /// `None` for zero.
    pub fn mag_exp(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mant.bits() as i64 + self.exp)
        }
    }

    pub fn neg(&self) -> Self {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    pub fn mul_pow2(&self, e: i64) -> Self {
        if self.is_zero() {
            Dyadic::zero()
        } else {
            Dyadic { mant: self.mant.clone(), exp: self.exp + e }
        }
    }

    /// Exact sum.
    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let exp = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - exp) as u64;
        let b = &other.mant << (other.exp - exp) as u64;
        Dyadic::new(a + b, exp)
    }

    /// Exact difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Exact product.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: &self.mant * &other.mant, exp: self.exp + other.exp }
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        Dyadic::new(&self.mant * k, self.exp)
    }

    /// Exact small integer power.
    pub fn pow_exact(&self, e: u32) -> Self {
        let mut acc = Dyadic::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Truncate toward zero to at most `bits` mantissa bits.  Returns the
    /// truncated value and an upper bound on the absolute error (one unit in
    /// the last kept place, or zero when exact).
    pub fn trunc_bits(&self, bits: u32) -> (Self, Self) {
        let nbits = self.mant.bits();
        if nbits <= bits as u64 {
            return (self.clone(), Dyadic::zero());
        }
        let drop = nbits - bits as u64;
        let kept = shr_to_zero(&self.mant, drop);
        let exp = self.exp + drop as i64;
        (Dyadic::new(kept, exp), Dyadic::pow2(exp))
    }

    /// Round a non-negative value up (away from zero) to at most `bits + 1`
    /// mantissa bits; the result is `>=` the input.  Used for radii.
    pub fn round_up_mag(&self, bits: u32) -> Self {
        debug_assert!(!self.is_negative());
        let nbits = self.mant.bits();
        if nbits <= bits as u64 {
            return self.clone();
        }
        let drop = nbits - bits as u64;
        let kept = shr_to_zero(&self.mant, drop) + 1;
        Dyadic::new(kept, self.exp + drop as i64)
    }

    /// Quotient truncated toward zero to `bits` significant bits, plus an
    /// upper bound on the absolute error (strictly less than one ulp).
    pub fn div_trunc(&self, den: &Self, bits: u32) -> (Self, Self) {
        assert!(!den.is_zero(), "division by zero dyadic");
        if self.is_zero() {
            return (Dyadic::zero(), Dyadic::zero());
        }
        let shift = bits as i64 + 1 + den.mant.bits() as i64 - self.mant.bits() as i64;
        // Pre-scale the numerator so the integer quotient carries ~bits+1
        // significant bits.  Right shifts truncate toward zero, which nests
        // correctly with the truncating BigInt division below.
        let num = if shift >= 0 {
            &self.mant << shift as u64
        } else {
            shr_to_zero(&self.mant, (-shift) as u64)
        };
        let q = &num / &den.mant; // BigInt division truncates toward zero
        let exp = self.exp - den.exp - shift;
        let err = Dyadic::pow2(exp);
        (Dyadic::new(q, exp), err)
    }

    /// Upper bound on `self / den` for non-negative `self` and positive
    /// `den`: truncated quotient plus one ulp.
    pub fn div_up(&self, den: &Self, bits: u32) -> Self {
        debug_assert!(!self.is_negative() && den.is_positive());
        let (q, err) = self.div_trunc(den, bits);
        q.add(&err)
    }

    pub fn cmp_val(&self, other: &Self) -> Ordering {
        match (self.mant.sign(), other.mant.sign()) {
            (Sign::Minus, Sign::NoSign) | (Sign::Minus, Sign::Plus) | (Sign::NoSign, Sign::Plus) => {
                return Ordering::Less
            }
            (Sign::Plus, Sign::NoSign) | (Sign::Plus, Sign::Minus) | (Sign::NoSign, Sign::Minus) => {
                return Ordering::Greater
            }
            (Sign::NoSign, Sign::NoSign) => return Ordering::Equal,
            _ => {}
        }
        // Same nonzero sign: decide by magnitude exponent when possible to
        // avoid large alignment shifts.
        let (ma, mb) = (self.mag_exp().unwrap(), other.mag_exp().unwrap());
        let positive = self.mant.is_positive();
        if ma != mb {
            let mag_cmp = ma.cmp(&mb);
            return if positive { mag_cmp } else { mag_cmp.reverse() };
        }
        self.sub(other).mant.cmp(&BigInt::zero())
    }

    /// Floor as a big integer.
    pub fn floor_int(&self) -> BigInt {
        if self.exp >= 0 {
            return &self.mant << self.exp as u64;
        }
        let s = (-self.exp) as u64;
        // shift right rounding toward negative infinity
        let q = shr_to_zero(&self.mant, s);
        if self.mant.is_negative() && (&q << s) != self.mant {
            q - 1
        } else {
            q
        }
    }

    pub fn is_integer(&self) -> bool {
        self.exp >= 0 || self.is_zero()
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::from(1) << (-self.exp) as u64)
        }
    }

    /// Truncate a rational toward zero to `bits` significant bits, returning
    /// the value and a one-ulp error bound (zero if exact).
    pub fn from_rational_trunc(r: &BigRational, bits: u32) -> (Self, Self) {
        let num = Dyadic::from_bigint(r.numer().clone());
        let den = Dyadic::from_bigint(r.denom().clone());
        let (q, err) = num.div_trunc(&den, bits);
        // exact when the rational is dyadic and fits
        if q.to_rational() == *r {
            (q, Dyadic::zero())
        } else {
            (q, err)
        }
    }

    /// Loose f64 view for display and non-certified estimates only.
    pub fn to_f64_approx(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let (top, shift) = if bits > 63 {
            (shr_to_zero(&self.mant, bits - 63), bits - 63)
        } else {
            (self.mant.clone(), 0)
        };
        let t = top.to_f64().unwrap_or(0.0);
        let e = self.exp + shift as i64;
        t * 2f64.powi(e.clamp(-1_000_000, 1_000_000) as i32)
    }

    /// Short decimal approximation `d.dddd…e±E` with `sig` significant
    /// digits.  Display-only; the exact (mant, exp) pair is authoritative.
    pub fn approx_decimal(&self, sig: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let neg = self.is_negative();
        // |self| = f * 2^b with f in [1/2, 1)
        let bits = self.mant.bits();
        let top_bits = 64.min(bits);
        let top = shr_to_zero(&self.mant.abs(), bits - top_bits)
            .to_u64()
            .unwrap_or(1);
        let f = top as f64 / 2f64.powi(top_bits as i32); // in [1/2, 1)
        let b = bits as i64 + self.exp;
        let e10f = b as f64 * std::f64::consts::LOG10_2 + f.log10();
        let mut e10 = e10f.floor() as i64;
        let mut m10 = 10f64.powf(e10f - e10 as f64);
        if m10 >= 10.0 {
            m10 /= 10.0;
            e10 += 1;
        }
        if m10 < 1.0 {
            m10 *= 10.0;
            e10 -= 1;
        }
        let digits = sig.max(1) - 1;
        format!("{}{:.*}e{}", if neg { "-" } else { "" }, digits, m10, e10)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_val(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_val(other)
    }
}

/// Shift right discarding low bits, rounding toward zero (sign-magnitude),
/// independent of the library's `Shr` semantics for negative values.
pub(crate) fn shr_to_zero(v: &BigInt, s: u64) -> BigInt {
    if s == 0 || v.is_zero() {
        return v.clone();
    }
    let mag = v.magnitude() >> s;
    BigInt::from_biguint(v.sign(), mag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn d(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    #[test]
    fn normalization_strips_trailing_zeros() {
        let x = d(8, -1); // 4
        assert_eq!(x.mant(), &BigInt::one());
        assert_eq!(x.exp(), 2);
        assert_eq!(x, d(4, 0));
    }

    #[test]
    fn exact_field_ops_match_rationals() {
        let a = d(3, -2); // 0.75
        let b = d(-5, -4); // -0.3125
        assert_eq!(a.add(&b).to_rational(), a.to_rational() + b.to_rational());
        assert_eq!(a.sub(&b).to_rational(), a.to_rational() - b.to_rational());
        assert_eq!(a.mul(&b).to_rational(), a.to_rational() * b.to_rational());
    }

    #[test]
    fn trunc_bits_bounds_the_error() {
        let x = d(0b101101101, -5);
        let (t, err) = x.trunc_bits(4);
        assert!(t.mant_bits() <= 4);
        let diff = x.sub(&t).abs();
        assert!(diff.cmp_val(&err) != Ordering::Greater);
        // truncation moves toward zero
        assert!(t.abs().cmp_val(&x.abs()) != Ordering::Greater);
    }

    #[test]
    fn div_trunc_error_below_one_ulp() {
        let a = d(1, 0);
        let b = d(3, 0);
        let (q, err) = a.div_trunc(&b, 20);
        let exact = BigRational::new(BigInt::one(), BigInt::from(3));
        let diff = (exact - q.to_rational()).abs();
        assert!(diff < err.to_rational());
        assert!(q.to_rational() < BigRational::new(BigInt::one(), BigInt::from(3)));
    }

    #[test]
    fn div_up_is_an_upper_bound() {
        let a = d(1, 0);
        let b = d(7, 0);
        let q = a.div_up(&b, 16);
        assert!(q.to_rational() >= BigRational::new(BigInt::one(), BigInt::from(7)));
    }

    #[test]
    fn floor_handles_negatives() {
        assert_eq!(d(7, -1).floor_int(), BigInt::from(3)); // 3.5
        assert_eq!(d(-7, -1).floor_int(), BigInt::from(-4)); // -3.5
        assert_eq!(d(-4, 0).floor_int(), BigInt::from(-4));
        assert_eq!(d(0, 0).floor_int(), BigInt::zero());
    }

    #[test]
    fn magnitude_exponent_brackets_value() {
        let x = d(13, -2); // 3.25 in [2, 4)
        assert_eq!(x.mag_exp(), Some(2));
        assert_eq!(d(1, 5).mag_exp(), Some(6)); // 32 in [32, 64)
    }

    #[test]
    fn compare_with_distant_exponents_is_cheap_and_right() {
        let tiny = Dyadic::pow2(-100_000);
        let big = Dyadic::pow2(100_000);
        assert_eq!(tiny.cmp_val(&big), Ordering::Less);
        assert_eq!(big.neg().cmp_val(&tiny.neg()), Ordering::Less);
    }

    #[test]
    fn round_up_mag_never_shrinks() {
        let x = d(0b1111111111111, -13);
        let r = x.round_up_mag(4);
        assert!(r.cmp_val(&x) != Ordering::Less);
        assert!(r.mant_bits() <= 5);
    }

    #[test]
    fn approx_decimal_sane() {
        let x = d(1, 10); // 1024
        let s = x.approx_decimal(4);
        assert!(s.starts_with("1.024e3"), "{s}");
        assert_eq!(d(0, 0).approx_decimal(4), "0");
        let y = d(-3, -2); // -0.75
        let s = y.approx_decimal(3);
        assert!(s.starts_with("-7.5") && s.ends_with("e-1"), "{s}");
    }
}
