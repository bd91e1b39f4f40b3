//! Logarithmic heights and the lower-bound engines for linear forms in
//! logarithms.
//!
//! Three engines are provided.  For a form with t terms over a degree-D real
//! field, `matveev_exponent` evaluates the general bound
//! E = 1.4 * 30^{t+3} * t^{4.5} * D^2 (1+log D)(1+log B) * prod A_i, so that
//! |gamma_1^{b_1} ... gamma_t^{b_t} - 1| >= exp(-E) whenever the form is
//! nonzero.  For two terms, `lmn_exponent` evaluates the sharper
//! Laurent-Mignotte-Nesterenko bound on |b_1 log gamma_1 + b_2 log gamma_2|.
//! `sl_absorb` turns a bound of the shape T > a/(log a)^r into an explicit
//! bound a < 2^r T (log T)^r.
//!
//! Nonvanishing of the forms is a mathematical hypothesis the caller asserts;
//! these engines only evaluate the exponents, in ball arithmetic, so every
//! returned bound is an enclosure rather than a rounded decimal.
//!
//! The submodule `chain` strings the engines together into the two certified
//! bound chains (the small-m and large-m scenarios).

pub mod chain;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::kfib::kfib_at;
use crate::numerics::Ball;
use crate::roots::KFibContext;

/// One instance of the t-term engine: degree, integer coefficients b_i, the
/// per-term height parameters A_i, and the coefficient cap B.
#[derive(Clone, Debug)]
pub struct LinearFormInstance {
    pub degree: u64,
    pub coefficients: Vec<BigInt>,
    pub heights: Vec<Ball>,
    pub b_cap: BigInt,
}

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl LinearFormInstance {
    /// Checks the preconditions the bound theorems require: two or three
    /// terms, A_i >= 0.16 certified from the ball's lower endpoint, and
    /// B at least as large as every |b_i|.
    fn validate(&self) -> Result<()> {
        let t = self.heights.len();
        if t != self.coefficients.len() {
            return Err(Error::InvalidInstance(format!(
                "{} coefficients but {} height parameters",
                self.coefficients.len(),
                t
            )));
        }
        if !(2..=3).contains(&t) {
            return Err(Error::InvalidInstance(format!("{t} terms, engines cover 2 or 3")));
        }
        if self.degree == 0 {
            return Err(Error::InvalidInstance("field degree must be at least 1".into()));
        }
        let floor = rat(4, 25);
        for (i, a) in self.heights.iter().enumerate() {
            if a.lo().to_rational() < floor {
                return Err(Error::InvalidInstance(format!(
                    "height parameter {i} not certified >= 0.16: {a}"
                )));
            }
        }
        let b_abs_max = self.coefficients.iter().map(|b| b.abs()).max().expect("t >= 2");
        if self.b_cap < b_abs_max {
            return Err(Error::InvalidInstance(format!(
                "coefficient cap {} below max |b_i| = {b_abs_max}",
                self.b_cap
            )));
        }
        Ok(())
    }
}

/// The general-t exponent: the form is at least exp(-E) in absolute value.
pub fn matveev_exponent(inst: &LinearFormInstance, prec: u32) -> Result<Ball> {
    inst.validate()?;
    let t = inst.heights.len() as i64;
    let d = Ball::from_i64(inst.degree as i64, prec);
    let one = Ball::one(prec);
    let mut e = Ball::from_rational(&rat(7, 5), prec);
    e = e.mul(&Ball::from_i64(30, prec).powi(t + 3)?);
    e = e.mul(&Ball::from_i64(t, prec).pow_ratio(&BigInt::from(9), &BigInt::from(2))?);
    e = e.mul(&d.powi(2)?);
    e = e.mul(&one.add(&d.ln()?));
    e = e.mul(&one.add(&Ball::from_int(&inst.b_cap, prec).ln()?));
    for a in &inst.heights {
        e = e.mul(&a.with_prec(prec));
    }
    Ok(e)
}

/// The two-term exponent: log of the form exceeds -E.  `log_b1`, `log_b2`
/// are the certified height parameters log B_i and `b_prime` the weighted
/// coefficient size b'.
pub fn lmn_exponent(degree: u64, log_b1: &Ball, log_b2: &Ball, b_prime: &Ball, prec: u32) -> Result<Ball> {
    if degree == 0 {
        return Err(Error::InvalidInstance("field degree must be at least 1".into()));
    }
    for (name, lb) in [("log B1", log_b1), ("log B2", log_b2)] {
        if !lb.lo().is_positive() {
            return Err(Error::InvalidInstance(format!("{name} not certified positive: {lb}")));
        }
    }
    // max{log b' + 0.14, 21/D, 1/2} as an interval hull
    let branch_log = b_prime
        .ln()?
        .add(&Ball::from_rational(&rat(7, 50), prec));
    let branch_ratio = Ball::from_rational(&BigRational::new(21.into(), BigInt::from(degree)), prec);
    let branch_half = Ball::from_rational(&rat(1, 2), prec);
    let peak = branch_log.max_hull(&branch_ratio).max_hull(&branch_half);

    let d4 = Ball::from_i64(degree as i64, prec).powi(4)?;
    Ok(Ball::from_rational(&rat(2434, 100), prec)
        .mul(&d4)
        .mul(&peak.powi(2)?)
        .mul(&log_b1.with_prec(prec))
        .mul(&log_b2.with_prec(prec)))
}

/// From T > a / (log a)^r, bound a itself: a < 2^r T (log T)^r.
/// Requires T > (4 r^2)^r.
pub fn sl_absorb(r: u32, t: &Ball) -> Result<Ball> {
    if r == 0 {
        return Err(Error::InvalidInstance("absorption exponent r must be at least 1".into()));
    }
    let threshold = BigInt::from(4u32 * r * r).pow(r);
    if t.lo().to_rational() <= BigRational::from_integer(threshold.clone()) {
        return Err(Error::InvalidInstance(format!(
            "absorption needs T > {threshold}, got {t}"
        )));
    }
    Ok(t.mul_pow2(r as i64).mul(&t.ln()?.powi(r as i64)?))
}

/// The heights the proof instantiates: h(alpha) = (log alpha)/k exactly
/// (alpha is a degree-k unit whose conjugates lie inside the unit circle),
/// the cited bound h(g) < 3 log k, and h(F_{m+1}) = log F_{m+1}.
#[derive(Clone, Debug)]
pub struct HeightConstants {
    pub h_alpha: Ball,
    pub h_g_bound: Ball,
    pub h_fm1: Ball,
}

pub fn log_height_constants(ctx: &KFibContext, m: u64) -> Result<HeightConstants> {
    if m < 3 {
        return Err(Error::Domain(format!("height constants need m >= 3, got {m}")));
    }
    let prec = ctx.precision();
    let k = BigInt::from(ctx.k());
    let h_alpha = ctx.log_alpha().div(&Ball::from_int(&k, prec))?;
    let h_g_bound = Ball::from_int(&k, prec).ln()?.mul_int(&BigInt::from(3));
    let f = kfib_at(ctx.k(), m as i64 + 1)?;
    let h_fm1 = Ball::from_int(&f, prec).ln()?;
    Ok(HeightConstants { h_alpha, h_g_bound, h_fm1 })
}

/// Logarithmic height from a monic-style factorization: leading coefficient
/// and an enclosure of every conjugate.  Exercised only for tiny degrees;
/// the proof's heights come from `log_height_constants`.
pub fn log_height(leading: &BigInt, conjugates: &[Ball], prec: u32) -> Result<Ball> {
    if !leading.is_positive() {
        return Err(Error::InvalidInstance("leading coefficient must be positive".into()));
    }
    if conjugates.is_empty() {
        return Err(Error::InvalidInstance("height needs at least one conjugate".into()));
    }
    let one = Ball::one(prec);
    let mut sum = Ball::from_int(leading, prec).ln()?;
    for c in conjugates {
        sum = sum.add(&c.abs().max_hull(&one).ln()?);
    }
    sum.div(&Ball::from_i64(conjugates.len() as i64, prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use rand::{Rng, SeedableRng};

    fn inst(degree: u64, coeffs: &[i64], heights: &[Ball], cap: i64) -> LinearFormInstance {
        LinearFormInstance {
            degree,
            coefficients: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
            heights: heights.to_vec(),
            b_cap: BigInt::from(cap),
        }
    }

    /// Decimal reference plus the slack of its own last digit.
    fn dec(s: &str) -> (BigRational, BigRational) {
        let (int, frac) = s.split_once('.').unwrap();
        let digits: BigInt = format!("{int}{frac}").parse().unwrap();
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        (BigRational::new(digits, den.clone()), BigRational::new(BigInt::one(), den))
    }

    fn assert_encloses(b: &Ball, reference: &str) {
        let (v, slack) = dec(reference);
        assert!(
            b.lo().to_rational() - &slack <= v && v <= b.hi().to_rational() + &slack,
            "{b} does not enclose {reference}"
        );
    }

    #[test]
    fn three_term_engine_matches_oracle() {
        // D=3, b=(-2,6,1), B=6, A=(6.3, 0.7, 9 ln 3)
        let prec = 128;
        let a3 = Ball::from_i64(3, prec).ln().unwrap().mul_int(&BigInt::from(9));
        let heights = [
            Ball::from_rational(&rat(63, 10), prec),
            Ball::from_rational(&rat(7, 10), prec),
            a3,
        ];
        let e = matveev_exponent(&inst(3, &[-2, 6, 1], &heights, 6), prec).unwrap();
        assert_encloses(&e, "329214898346032.62720517903930919");
    }

    #[test]
    fn two_term_engine_matches_oracle() {
        // D=1, B=1, A_i = 1/4: E = 1.4 * 30^5 * 2^4.5 / 16
        let prec = 128;
        let a = Ball::from_rational(&rat(1, 4), prec);
        let e = matveev_exponent(&inst(1, &[1, -1], &[a.clone(), a], 1), prec).unwrap();
        assert_encloses(&e, "48111545.391932693560233450397614");
    }

    #[test]
    fn height_exactly_at_the_floor_is_uncertifiable() {
        // 4/25 is not dyadic, so a ball built from it always dips a hair
        // below the floor; rejecting it is the sound verdict.
        let prec = 128;
        let a = Ball::from_rational(&rat(4, 25), prec);
        assert!(matches!(
            matveev_exponent(&inst(1, &[1, -1], &[a.clone(), a], 1), prec),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn doubling_a_height_doubles_the_exponent() {
        let prec = 128;
        let a = Ball::from_rational(&rat(1, 2), prec);
        let base = inst(2, &[3, -4], &[a.clone(), a.clone()], 4);
        let mut doubled = base.clone();
        doubled.heights[0] = doubled.heights[0].mul_pow2(1);
        let e1 = matveev_exponent(&base, prec).unwrap();
        let e2 = matveev_exponent(&doubled, prec).unwrap();
        assert_eq!(e2.mid().cmp_val(&e1.mid().mul_pow2(1)), std::cmp::Ordering::Equal);
        assert_eq!(e2.rad().cmp_val(&e1.rad().mul_pow2(1)), std::cmp::Ordering::Equal);
    }

    #[test]
    fn engine_rejects_undersized_heights_and_caps() {
        let prec = 64;
        let low = Ball::from_rational(&rat(3, 25), prec); // 0.12 < 0.16
        let ok = Ball::one(prec);
        assert!(matches!(
            matveev_exponent(&inst(2, &[1, 1], &[low, ok.clone()], 1), prec),
            Err(Error::InvalidInstance(_))
        ));
        assert!(matches!(
            matveev_exponent(&inst(2, &[5, 1], &[ok.clone(), ok], 4), prec),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn lmn_trivial_instance_takes_the_21_branch() {
        // D=1, b'=1, log B_i = 1: max{0.14, 21, 0.5} = 21, E = 24.34 * 441
        let prec = 128;
        let one = Ball::one(prec);
        let e = lmn_exponent(1, &one, &one, &one, prec).unwrap();
        assert!(e.contains_rational(&rat(1073394, 100)));
    }

    #[test]
    fn lmn_branch_selection_small_x_large_ratio() {
        // D=3 with b' = 2.4: 21/3 = 7 beats log 2.4 + 0.14, so the result
        // must match the pure 21/D evaluation
        let prec = 128;
        let lb1 = Ball::from_i64(3, prec).ln().unwrap().mul_int(&BigInt::from(4));
        let lb2 = Ball::from_rational(&rat(1, 3), prec);
        let bp = Ball::from_rational(&rat(12, 5), prec);
        let e = lmn_exponent(3, &lb1, &lb2, &bp, prec).unwrap();
        let direct = Ball::from_rational(&rat(2434, 100), prec)
            .mul(&Ball::from_i64(81, prec))
            .mul(&Ball::from_i64(49, prec))
            .mul(&lb1)
            .mul(&lb2);
        assert!(e.sub(&direct).contains_zero());
        // and strictly exceeds what the log-branch alone would give
        let log_branch = bp.ln().unwrap().add(&Ball::from_rational(&rat(7, 50), prec));
        assert_eq!(log_branch.try_cmp(&Ball::from_i64(7, prec)), Some(std::cmp::Ordering::Less));
    }

    #[test]
    fn lmn_monotone_in_heights() {
        let prec = 128;
        let lb1 = Ball::from_i64(2, prec);
        let lb2 = Ball::from_rational(&rat(1, 2), prec);
        let bp = Ball::from_i64(10, prec);
        let e1 = lmn_exponent(4, &lb1, &lb2, &bp, prec).unwrap();
        let e2 = lmn_exponent(4, &lb1.mul_pow2(1), &lb2, &bp, prec).unwrap();
        assert_eq!(e1.try_cmp(&e2), Some(std::cmp::Ordering::Less));
    }

    #[test]
    fn absorption_examples() {
        let prec = 128;
        // r=1, T=100: bound 2 * 100 * ln 100
        let b = sl_absorb(1, &Ball::from_i64(100, prec)).unwrap();
        assert_encloses(&b, "921.03403719761827360719658187375");
        // precondition: r=2 needs T > 256
        assert!(matches!(
            sl_absorb(2, &Ball::from_i64(256, prec)),
            Err(Error::InvalidInstance(_))
        ));
        assert!(sl_absorb(2, &Ball::from_i64(257, prec)).is_ok());
    }

    #[test]
    fn absorption_is_sound_on_random_instances() {
        // for T := 1.01 * a/(ln a)^r, check a < 2^r T (ln T)^r
        let prec = 96;
        let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed_ab50);
        for _ in 0..1000 {
            let r = if rng.gen_bool(0.5) { 1u32 } else { 2 };
            let a: i64 = rng.gen_range(10_000..1_000_000_000);
            let a_ball = Ball::from_i64(a, prec);
            let t = a_ball
                .div(&a_ball.ln().unwrap().powi(r as i64).unwrap())
                .unwrap()
                .mul(&Ball::from_rational(&rat(101, 100), prec));
            let bound = sl_absorb(r, &t).unwrap();
            assert_eq!(
                a_ball.try_cmp(&bound),
                Some(std::cmp::Ordering::Less),
                "a={a} r={r} bound={bound}"
            );
        }
    }

    #[test]
    fn proof_height_constants() {
        let prec = 128;
        let ctx = KFibContext::new(2, prec).unwrap();
        let h = log_height_constants(&ctx, 5).unwrap();
        // h(alpha) for k=2 is (ln golden)/2
        assert_encloses(&h.h_alpha, "0.24060591252980172374887945671218");
        // h(F_6) = ln 8 for the classical sequence
        assert!(h
            .h_fm1
            .sub(&Ball::from_i64(8, prec).ln().unwrap())
            .contains_zero());

        let ctx3 = KFibContext::new(3, prec).unwrap();
        let h3 = log_height_constants(&ctx3, 4).unwrap();
        // 3 ln 3 = 3.2958...
        assert_encloses(&h3.h_g_bound, "3.295836866004329074185735710767");
        // h(F_{m+1}) <= m log alpha < 0.7 m for every instantiated cell
        for m in 3..12u64 {
            let hc = log_height_constants(&ctx3, m).unwrap();
            let cap = ctx3.log_alpha().mul_int(&BigInt::from(m));
            assert_eq!(hc.h_fm1.try_le(&cap), Some(true), "m={m}");
            assert_eq!(
                cap.try_cmp(&Ball::from_rational(&rat(7 * m as i64, 10), prec)),
                Some(std::cmp::Ordering::Less)
            );
        }
    }

    #[test]
    fn minimal_polynomial_height_for_the_golden_ratio() {
        // conjugates (1 +- sqrt 5)/2, leading coefficient 1:
        // only the dominant one is outside the unit circle
        let prec = 128;
        let s5 = Ball::from_i64(5, prec)
            .pow_ratio(&BigInt::one(), &BigInt::from(2))
            .unwrap();
        let phi = s5.add(&Ball::one(prec)).mul_pow2(-1);
        let psi = Ball::one(prec).sub(&s5).mul_pow2(-1);
        let h = log_height(&BigInt::one(), &[phi, psi], prec).unwrap();
        assert_encloses(&h, "0.24060591252980172374887945671218");
    }

    #[test]
    fn height_of_a_rational_integer_is_its_log() {
        let prec = 96;
        let h = log_height(&BigInt::one(), &[Ball::from_i64(7, prec)], prec).unwrap();
        assert!(h.sub(&Ball::from_i64(7, prec).ln().unwrap()).contains_zero());
        // and of 1/3: leading coefficient 3, conjugate inside the circle
        let third = Ball::from_rational(&rat(1, 3), prec);
        let h3 = log_height(&BigInt::from(3), &[third], prec).unwrap();
        assert!(h3.sub(&Ball::from_i64(3, prec).ln().unwrap()).contains_zero());
    }

    #[test]
    fn height_rejects_bad_leading_coefficient() {
        let prec = 64;
        assert!(log_height(&BigInt::from(-1), &[Ball::one(prec)], prec).is_err());
        assert!(log_height(&BigInt::one(), &[], prec).is_err());
    }
}
