//! Fixed-point cores for ln and exp with explicit ulp accounting.
//!
//! Values are plain `BigInt`s interpreted as `v / 2^p`; every routine returns
//! the computed integer together with an upper bound, in units in the last
//! place, on the distance to the true real value.  Ball arithmetic on top of
//! this only has to convert (value, ulps) pairs into midpoint/radius form.
//!
//! ln uses the atanh series after range reduction to [3/4, 3/2); exp uses
//! argument reduction by ln 2, a Taylor sum on `r / 2^16`, and sixteen
//! squarings.  All series arguments are kept below 0.36 in absolute value so
//! one set of error recurrences covers every call site, including the cached
//! `ln 2 = 2 atanh(1/3)` computation.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use super::dyadic::{shr_to_zero, Dyadic};
use crate::error::{Error, Result};

/// Guard bits beyond the requested precision for ln.
const LN_GUARD: u32 = 64;
/// Guard bits beyond the requested precision for exp.
const EXP_GUARD: u32 = 96;
/// Series terms smaller than this many ulps stop the loop; the tail bounds
/// below absorb everything beyond.
const STOP_ULPS: u64 = 64;

/// Truncate `x` to the fixed-point grid `2^-p`, toward zero.
/// Returns the integer and the truncation error in ulps (0 or 1).
fn to_fixed(x: &Dyadic, p: u32) -> (BigInt, u64) {
    let shift = x.exp() + p as i64;
    if shift >= 0 {
        (x.mant() << shift as u64, 0)
    } else {
        (shr_to_zero(x.mant(), (-shift) as u64), 1)
    }
}

/// atanh(z/2^p) for |z/2^p| <= 0.36, as (value, error ulps) at scale `p`.
///
/// Error recurrences assume the 0.36 cap: with |z| <= 0.36 the term ratio is
/// z^2 <= 0.13, so halving the propagated budgets each step dominates the
/// true contraction and the whole loop stays within a few dozen ulps.
fn atanh_fixed(z: &BigInt, err_z: u64, p: u32) -> (BigInt, u64) {
    let cap = (BigInt::one() << p) * 36u32 / 100u32;
    assert!(z.abs() <= cap, "atanh argument out of reduced range");

    let z2 = shr_to_zero(&(z * z), p as u64);
    let err_z2 = err_z + 1;

    let mut sum = z.clone();
    let mut err_sum = err_z;
    let mut pow = z.clone();
    let mut err_pow = err_z;
    let mut j = BigInt::from(1u32);
    let stop = BigInt::from(STOP_ULPS);

    while pow.abs() > stop {
        pow = shr_to_zero(&(&pow * &z2), p as u64);
        err_pow = err_pow / 2 + err_z2 / 2 + 3;
        j += 2u32;
        let term = &pow / &j;
        let err_term = err_pow / j.to_u64().unwrap_or(u64::MAX) + 2;
        sum += term;
        err_sum += err_term;
    }
    let tail = err_pow / 16 + 4;
    (sum, err_sum + tail)
}

/// Best ln 2 computed so far: (scale p, value, error ulps).  Requests at or
/// below the cached scale are served by truncation.
static LN2_CACHE: Mutex<Option<(u32, BigInt, u64)>> = Mutex::new(None);

/// ln 2 at scale `p` with its ulp error bound.
pub(crate) fn ln2_fixed(p: u32) -> (BigInt, u64) {
    let mut guard = LN2_CACHE.lock().expect("ln2 cache poisoned");
    if let Some((cached_p, v, e)) = guard.as_ref() {
        if *cached_p >= p {
            let delta = (cached_p - p) as u64;
            if delta == 0 {
                return (v.clone(), *e);
            }
            return (shr_to_zero(v, delta), (e >> delta.min(63)) + 2);
        }
    }
    // ln 2 = 2 atanh(1/3)
    let third = (BigInt::one() << p) / 3u32;
    let (a, err_a) = atanh_fixed(&third, 1, p);
    let v = a << 1u32;
    let e = 2 * err_a;
    *guard = Some((p, v.clone(), e));
    (v, e)
}

/// ln(x) for a positive dyadic, as an exact dyadic midpoint plus an exact
/// dyadic radius bound.  Internally works at `prec + 64` bits.
pub(crate) fn ln_point(x: &Dyadic, prec: u32) -> Result<(Dyadic, Dyadic)> {
    if !x.is_positive() {
        return Err(Error::Domain(format!(
            "ln of a non-positive value (sign {})",
            if x.is_zero() { "zero" } else { "negative" }
        )));
    }
    let p = prec + LN_GUARD;
    let m = x.mant(); // odd, positive
    let nb = m.bits();
    // x = f * 2^b with f in [3/4, 3/2): shift by nb bits puts m/2^nb in
    // [1/2, 1); values below 3/4 get one fewer shift.
    // m/2^nb < 3/4  <=>  4m < 3*2^nb
    let low_half = (m << 2u32) < (BigInt::from(3u32) << nb);
    let s = if low_half { nb - 1 } else { nb };
    let b = x.exp() + s as i64;

    let (f, err_f) = if p as u64 >= s {
        (m << (p as u64 - s), 0u64)
    } else {
        (shr_to_zero(m, s - p as u64), 1u64)
    };
    // z = (f - 1) / (f + 1), |z| <= 1/5
    let one = BigInt::one() << p;
    let num = (&f - &one) << p;
    let den = &f + &one;
    let z = &num / &den;
    let err_z = err_f + 2;
    let (a, err_a) = atanh_fixed(&z, err_z, p);

    let (l2, err_l2) = ln2_fixed(p);
    let v = (a << 1u32) + l2 * b;
    let err = 2 * err_a + b.unsigned_abs() * err_l2 + 1;

    let scale = -(p as i64);
    Ok((Dyadic::new(v, scale), Dyadic::new(BigInt::from(err), scale)))
}

/// exp(x) for a dyadic, as an exact dyadic midpoint plus an exact dyadic
/// radius bound.  Internally works at `prec + 96` bits.
///
/// The binary exponent of the result is `round(x / ln 2)`; arguments whose
/// reduction exponent exceeds 2^43 are rejected rather than silently losing
/// accuracy.
pub(crate) fn exp_point(x: &Dyadic, prec: u32) -> Result<(Dyadic, Dyadic)> {
    let p = prec + EXP_GUARD;
    if let Some(me) = x.mag_exp() {
        if me > 50 {
            return Err(Error::MagnitudeOverflow(format!(
                "exp argument magnitude near 2^{me} exceeds the supported range"
            )));
        }
    }
    let (xf, err_x) = to_fixed(x, p);
    let (l2, err_l2) = ln2_fixed(p);

    // n = round(x / ln 2), computed as floor((2x + ln2) / (2 ln2)).
    let n_big = (&xf * 2u32 + &l2).div_floor(&(&l2 * 2u32));
    let n = n_big.to_i64().ok_or_else(|| {
        Error::MagnitudeOverflow("exp reduction exponent does not fit in 64 bits".into())
    })?;
    if n.unsigned_abs() > 1u64 << 43 {
        return Err(Error::MagnitudeOverflow(format!(
            "exp reduction exponent {n} exceeds the supported range"
        )));
    }

    // r = x - n ln2 in [-ln2/2 - eps, ln2/2 + eps]
    let r = &xf - &l2 * n;
    let err_r: u128 = err_x as u128 + n.unsigned_abs() as u128 * err_l2 as u128;
    let cap = (BigInt::one() << p) * 36u32 / 100u32;
    if r.abs() > cap {
        // only reachable when |n| err_l2 swamps the grid; retry higher up
        return Err(Error::NotSeparated {
            context: "exp argument reduction lost too much accuracy".into(),
        });
    }

    // y = r / 2^16, then exp(y) by Taylor, then 16 squarings.
    let y = shr_to_zero(&r, 16);
    let err_y: u128 = (err_r >> 16) + 1;

    let one = BigInt::one() << p;
    let mut sum = one.clone();
    let mut err_sum: u128 = 0;
    let mut term = one;
    let mut err_term: u128 = 0;
    let mut j: u64 = 0;
    let stop = BigInt::from(STOP_ULPS);
    loop {
        j += 1;
        term = shr_to_zero(&(&term * &y), p as u64);
        err_term = err_term / 65536 + 2 * err_y + 2;
        term /= j;
        err_term = err_term / j as u128 + 1;
        sum += &term;
        err_sum += err_term;
        if term.abs() <= stop {
            break;
        }
    }
    let mut v = sum;
    let mut err: u128 = err_sum + 2;
    for _ in 0..16 {
        v = shr_to_zero(&(&v * &v), p as u64);
        err = err
            .checked_mul(3)
            .and_then(|e| e.checked_add(2))
            .ok_or_else(|| Error::NotSeparated {
                context: "exp error budget overflow during squaring".into(),
            })?;
    }

    let scale = n - p as i64;
    Ok((Dyadic::new(v, scale), Dyadic::new(BigInt::from(err), scale)))
}
