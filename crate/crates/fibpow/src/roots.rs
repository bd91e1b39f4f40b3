//! Certified isolation of the dominant characteristic root and the
//! Binet-style coefficient.
//!
//! The characteristic polynomial of the order-k recurrence,
//! Psi_k(x) = x^k - x^{k-1} - ... - x - 1, has exactly one root alpha(k)
//! outside the unit circle, and it lies in (2(1 - 2^-k), 2).  Multiplying by
//! (x - 1) gives p(x) = x^{k+1} - 2 x^k + 1 = x^k (x - 2) + 1, which has the
//! same sign as Psi_k for x > 1 and is strictly increasing on the bracket
//! (its derivative x^{k-1}((k+1)x - 2k) is positive there because
//! 2 - 2^{1-k} >= 2k/(k+1), equivalent to 2^k >= k + 1).  So sign tests on p
//! drive a certified bisection; a plain Newton phase accelerates to the
//! target width and the final enclosure is re-certified by two sign tests.
//! Convergence heuristics are never trusted.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::numerics::{Ball, Dyadic, PrecisionPolicy};

/// Sign of p(x) = x^k (x - 2) + 1 at an exact dyadic x in (1, 2), certified
/// by ball evaluation at escalating precision.  Rational x in that range is
/// never a root of p (its only rational roots are +-1), so this terminates.
fn char_sign_at(k: u64, x: &Dyadic) -> Result<i8> {
    let start = (x.mant_bits() as u32).saturating_add(k as u32 / 8).max(64);
    let policy = PrecisionPolicy::default().starting_at(start);
    policy.run(|prec| {
        let xb = Ball::exact(x.clone(), prec);
        let two = Ball::from_i64(2, prec);
        let p = xb.powi(k as i64)?.mul(&xb.sub(&two)).add(&Ball::one(prec));
        p.try_sign().ok_or_else(|| Error::NotSeparated {
            context: format!("sign of the characteristic combination at {}", x.approx_decimal(12)),
        })
    })
}

/// Lower end of the root bracket, 2(1 - 2^-k) = 2 - 2^{1-k}, exactly.
/// `dominant_root` certifies alpha(k) strictly above this value, which makes
/// it a cheap exact lower bound on alpha for downstream inequalities.
pub fn bracket_lo(k: u64) -> Dyadic {
    Dyadic::from_i64(2).sub(&Dyadic::pow2(1 - k as i64))
}

/// Ball containing alpha(k), radius at most 2^-precision, certified to lie
/// strictly inside (2(1 - 2^-k), 2).
pub fn dominant_root(k: u64, precision: u32) -> Result<Ball> {
    if k < 2 {
        return Err(Error::Domain(format!("sequence order k = {k} below 2")));
    }
    // The root sits about 2^-k from both bracket ends, so certifying the
    // strict bracket needs enclosures at least that fine.
    let precision = precision.max(k as u32 + 16).max(64);
    let mut lo = bracket_lo(k);
    let mut hi = Dyadic::from_i64(2);
    // p < 0 at the lower bracket end, p(2) = 1 > 0: both certify the bracket
    if char_sign_at(k, &lo)? >= 0 {
        return Err(Error::Domain(format!(
            "characteristic sign unexpectedly non-negative at the lower bracket for k = {k}"
        )));
    }

    // Certified bisection down to a comfortable Newton basin.
    let coarse_bits = 64i64;
    while hi.sub(&lo).mag_exp().is_some_and(|e| e > -coarse_bits) {
        let mid = lo.add(&hi).mul_pow2(-1);
        if char_sign_at(k, &mid)? < 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Newton on p at doubling working precision; midpoints only, certified
    // afterwards.  Accuracy roughly doubles per step from the 2^-64 basin.
    let target = precision + 8;
    let mut c = lo.add(&hi).mul_pow2(-1);
    let mut have_bits = coarse_bits as u32;
    while have_bits < target {
        have_bits = (have_bits * 2).min(target);
        let work = have_bits + 64;
        let cb = Ball::exact(c.clone(), work);
        let two = Ball::from_i64(2, work);
        let pk1 = cb.powi(k as i64 - 1)?;
        let p = pk1.mul(&cb).mul(&cb.sub(&two)).add(&Ball::one(work));
        let kk = BigInt::from(k);
        let dp = pk1.mul(
            &cb.mul_int(&(&kk + BigInt::one()))
                .sub(&Ball::from_int(&(&kk * 2), work)),
        );
        let step = p.div(&dp)?;
        let (next, _) = c.sub(step.mid()).trunc_bits(work);
        c = next;
    }

    // Final certification: sign change across [c - delta, c + delta].
    let delta = Dyadic::pow2(-(precision as i64) - 2);
    let lo_ok = char_sign_at(k, &c.sub(&delta))? < 0;
    let hi_ok = char_sign_at(k, &c.add(&delta))? > 0;
    if !(lo_ok && hi_ok) {
        // Newton drifted; fall back to fully certified bisection.
        let mut lo = lo;
        let mut hi = hi;
        while hi.sub(&lo).mag_exp().is_some_and(|e| e > -(precision as i64) - 2) {
            let mid = lo.add(&hi).mul_pow2(-1);
            if char_sign_at(k, &mid)? < 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mid = lo.add(&hi).mul_pow2(-1);
        let rad = hi.sub(&lo).mul_pow2(-1);
        return Ok(Ball::new(mid, rad, precision + 16));
    }
    // Stored at a slightly higher working precision so rounding the midpoint
    // cannot push the radius back above 2^-precision.
    let ball = Ball::new(c, delta, precision + 16);
    debug_assert!(ball.lo() > bracket_lo(k) && ball.hi() < Dyadic::from_i64(2));
    Ok(ball)
}

/// g = (alpha - 1) / (2 + (k+1)(alpha - 2)) from an enclosure of alpha.
pub fn binet_coefficient(k: u64, alpha: &Ball) -> Result<Ball> {
    let prec = alpha.prec();
    let one = Ball::one(prec);
    let two = Ball::from_i64(2, prec);
    let den = two.add(&alpha.sub(&two).mul_int(&BigInt::from(k + 1)));
    alpha.sub(&one).div(&den)
}

/// |norm of g| = (k-1)^2 / (2^{k+1} k^k - (k+1)^{k+1}), exact and reduced.
pub fn g_norm(k: u64) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::Domain(format!("sequence order k = {k} below 2")));
    }
    let num = BigInt::from((k - 1) * (k - 1));
    let den = (BigInt::one() << (k + 1)) * BigInt::from(k).pow(k as u32)
        - BigInt::from(k + 1).pow(k as u32 + 1);
    if den <= BigInt::one() {
        return Err(Error::Domain(format!("norm denominator non-positive at k = {k}")));
    }
    Ok(BigRational::new(num, den))
}

/// Immutable per-k bundle: certified enclosures of the dominant root, the
/// Binet coefficient, and log alpha, plus the certifications that tie them
/// together.
#[derive(Clone, Debug)]
pub struct KFibContext {
    k: u64,
    precision: u32,
    alpha: Ball,
    g: Ball,
    log_alpha: Ball,
}

impl KFibContext {
    /// Build the context at (at least) the requested precision.  The
    /// effective precision is raised to k + 64 bits so the root enclosure is
    /// always fine enough to separate g from its bounds 1/2 and 1, whose
    /// margins shrink like 2^-k.
    pub fn new(k: u64, precision: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::Domain(format!("sequence order k = {k} below 2")));
        }
        let precision = precision.max(k as u32 + 64);
        let alpha = dominant_root(k, precision)?;

        // The combination (alpha^{k+1} - 2 alpha^k + 1) / (alpha - 1) is the
        // characteristic polynomial; its numerator must vanish inside the
        // enclosure.
        let two = Ball::from_i64(2, precision);
        let numer = alpha
            .powi(k as i64)?
            .mul(&alpha.sub(&two))
            .add(&Ball::one(precision));
        if !numer.contains_zero() {
            return Err(Error::Domain(format!(
                "root enclosure for k = {k} does not annihilate the characteristic polynomial"
            )));
        }

        let g = binet_coefficient(k, &alpha)?;
        let half = Ball::new(Dyadic::new(BigInt::one(), -1), Dyadic::zero(), precision);
        let one = Ball::one(precision);
        let g_above_half = matches!(half.try_cmp(&g), Some(std::cmp::Ordering::Less));
        let g_below_one = matches!(g.try_cmp(&one), Some(std::cmp::Ordering::Less));
        if !(g_above_half && g_below_one) {
            return Err(Error::NotSeparated {
                context: format!("coefficient bounds 1/2 < g < 1 undecided for k = {k} at {precision} bits"),
            });
        }

        let log_alpha = alpha.ln()?;
        Ok(KFibContext { k, precision, alpha, g, log_alpha })
    }

    /// Escalating construction under a policy (useful when a caller needs
    /// tighter enclosures than it can predict).
    pub fn build(k: u64, policy: &PrecisionPolicy) -> Result<Self> {
        policy.run(|prec| KFibContext::new(k, prec))
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn alpha(&self) -> &Ball {
        &self.alpha
    }

    pub fn g(&self) -> &Ball {
        &self.g
    }

    pub fn log_alpha(&self) -> &Ball {
        &self.log_alpha
    }

    /// log(1/g), positive since g < 1.
    pub fn log_inv_g(&self) -> Result<Ball> {
        Ok(self.g.ln()?.neg())
    }

    /// beta = log(1/g) / log(alpha), the irrational shift driving the
    /// convergent-based bound on x.
    pub fn beta(&self) -> Result<Ball> {
        self.log_inv_g()?.div(&self.log_alpha)
    }

    /// alpha^e as a ball.
    pub fn alpha_pow(&self, e: i64) -> Result<Ball> {
        self.alpha.powi(e)
    }
}
