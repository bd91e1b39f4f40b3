//! Certified continued fractions.
//!
//! Partial quotients are produced by an exact Gauss map on a rational
//! interval enclosing the target value: at each step both endpoints must
//! agree on their floor, otherwise the whole expansion restarts from a
//! sharper enclosure requested through the value's `RealSource`.  No quotient
//! is ever derived from a truncated decimal, so a returned list is a proof.
//!
//! Indexing is 0-based: p_0/q_0 = a_0/1 is the first convergent.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numerics::{PrecisionPolicy, RealSource};

/// One convergent p_t/q_t with its partial quotient a_t.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub t: usize,
    pub a: BigInt,
    pub p: BigInt,
    pub q: BigInt,
}

/// Outcome of one exact Gauss-map pass at a fixed enclosure width.
enum Pass {
    /// All requested quotients certified.
    Full(Vec<BigInt>),
    /// Interval became too wide after this many quotients.
    Partial(usize),
    /// The value is rational and its expansion ends after these quotients.
    Terminated(Vec<BigInt>),
}

/// Run the interval Gauss map until `count` quotients are certified or the
/// interval stops deciding floors.  `lo <= hi` must enclose the value.
fn gauss_pass(mut lo: BigRational, mut hi: BigRational, count: usize) -> Pass {
    let mut quotients = Vec::with_capacity(count);
    while quotients.len() < count {
        let a = lo.floor();
        if a != hi.floor() {
            return Pass::Partial(quotients.len());
        }
        let a = a.to_integer();
        quotients.push(a.clone());
        lo -= BigRational::from_integer(a.clone());
        hi -= BigRational::from_integer(a);
        if quotients.len() == count {
            break;
        }
        if lo.is_zero() {
            if hi.is_zero() {
                return Pass::Terminated(quotients);
            }
            // endpoint touches an integer: cannot invert yet
            return Pass::Partial(quotients.len());
        }
        // tail = 1/(x - a); reciprocal flips the interval
        std::mem::swap(&mut lo, &mut hi);
        lo = lo.recip();
        hi = hi.recip();
    }
    Pass::Full(quotients)
}

/// First `count` partial quotients of the source's value, certified.
///
/// Rational values whose expansion ends before `count` quotients give a hard
/// domain error when the enclosure is exact, and precision exhaustion when it
/// merely shrinks (no finite enclosure can prove a value rational).
pub fn cf_quotients(tau: &dyn RealSource, count: usize, policy: &PrecisionPolicy) -> Result<Vec<BigInt>> {
    policy.run(|prec| {
        let (lo, hi) = match tau.exact_rational() {
            Some(r) => (r.clone(), r),
            None => {
                let ball = tau.eval(prec)?;
                (ball.lo().to_rational(), ball.hi().to_rational())
            }
        };
        match gauss_pass(lo, hi, count) {
            Pass::Full(q) => Ok(q),
            Pass::Partial(got) => Err(Error::NotSeparated {
                context: format!(
                    "expansion of {} certified only {got}/{count} quotients at {prec} bits",
                    tau.describe()
                ),
            }),
            Pass::Terminated(q) => Err(Error::Domain(format!(
                "expansion of {} terminates after {} quotients (rational value), {count} requested",
                tau.describe(),
                q.len()
            ))),
        }
    })
}

/// Build the convergents from partial quotients via the standard
/// three-term recurrences.
pub fn convergents_from_quotients(quotients: &[BigInt]) -> Vec<Convergent> {
    let mut out = Vec::with_capacity(quotients.len());
    let (mut p_prev2, mut p_prev1) = (BigInt::zero(), BigInt::one());
    let (mut q_prev2, mut q_prev1) = (BigInt::one(), BigInt::zero());
    for (t, a) in quotients.iter().enumerate() {
        debug_assert!(t == 0 || a.is_positive(), "tail quotients are at least 1");
        let p = a * &p_prev1 + &p_prev2;
        let q = a * &q_prev1 + &q_prev2;
        out.push(Convergent { t, a: a.clone(), p: p.clone(), q: q.clone() });
        p_prev2 = std::mem::replace(&mut p_prev1, p);
        q_prev2 = std::mem::replace(&mut q_prev1, q);
    }
    out
}

/// First `count` convergents of the source's value.
pub fn cf_expand(tau: &dyn RealSource, count: usize, policy: &PrecisionPolicy) -> Result<Vec<Convergent>> {
    Ok(convergents_from_quotients(&cf_quotients(tau, count, policy)?))
}

/// Data for the convergent-denominator gap criterion.
#[derive(Clone, Debug)]
pub struct LegendreBound {
    /// Smallest index with q_n > the threshold.
    pub n: usize,
    /// That denominator.
    pub q: BigInt,
    /// max of a_0..a_n; any rational r/s with 0 < s < threshold then
    /// satisfies |tau - r/s| > 1 / ((a_max + 2) s^2).
    pub a_max: BigInt,
}

/// Expand until a convergent denominator exceeds `threshold`, reporting the
/// index and the running maximum partial quotient.
pub fn legendre_bound(tau: &dyn RealSource, threshold: &BigInt, policy: &PrecisionPolicy) -> Result<LegendreBound> {
    if !threshold.is_positive() {
        return Err(Error::Domain(format!("approximation threshold must be positive, got {threshold}")));
    }
    let mut count = 32usize;
    loop {
        let convs = cf_expand(tau, count, policy)?;
        if let Some(hit) = convs.iter().find(|c| &c.q > threshold) {
            let a_max = convs[..=hit.t]
                .iter()
                .map(|c| c.a.clone())
                .max()
                .expect("nonempty prefix");
            return Ok(LegendreBound { n: hit.t, q: hit.q.clone(), a_max });
        }
        count = count
            .checked_mul(2)
            .filter(|c| *c <= 1 << 20)
            .ok_or_else(|| Error::Domain("denominators refuse to pass the threshold".into()))?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Ball, Dyadic, FnSource, RationalSource};
    use crate::roots::KFibContext;

    fn golden() -> impl RealSource {
        FnSource::new("golden ratio", |prec| {
            let s5 = Ball::from_i64(5, prec).pow_ratio(&BigInt::one(), &BigInt::from(2))?;
            Ok(s5.add(&Ball::one(prec)).mul_pow2(-1))
        })
    }

    #[test]
    fn golden_ratio_is_all_ones_with_fibonacci_denominators() {
        let pol = PrecisionPolicy::default();
        let convs = cf_expand(&golden(), 12, &pol).unwrap();
        let mut fib = (BigInt::one(), BigInt::one()); // q_0, q_1
        for c in &convs {
            assert_eq!(c.a, BigInt::one(), "t={}", c.t);
            if c.t == 0 {
                assert_eq!(c.q, BigInt::one());
            } else {
                assert_eq!(c.q, fib.1, "t={}", c.t);
                fib = (fib.1.clone(), &fib.0 + &fib.1);
            }
        }
        assert_eq!(convs[11].q, BigInt::from(144));
    }

    #[test]
    fn golden_ratio_legendre_data_at_one_hundred() {
        let pol = PrecisionPolicy::default();
        let lb = legendre_bound(&golden(), &BigInt::from(100), &pol).unwrap();
        assert_eq!(lb.n, 11);
        assert_eq!(lb.q, BigInt::from(144));
        assert_eq!(lb.a_max, BigInt::one());
    }

    #[test]
    fn exact_rational_expands_then_terminates() {
        let pol = PrecisionPolicy::default();
        let r = RationalSource(BigRational::new(BigInt::from(22), BigInt::from(7)));
        let q2 = cf_quotients(&r, 2, &pol).unwrap();
        assert_eq!(q2, vec![BigInt::from(3), BigInt::from(7)]);
        let err = cf_quotients(&r, 5, &pol).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
    }

    #[test]
    fn fuzzy_rational_exhausts_instead_of_inventing_quotients() {
        let pol = PrecisionPolicy::new(32, 2, 1, 256).unwrap();
        // enclosure of 22/7 that never becomes exact
        let fuzzy = FnSource::new("fuzzy 22/7", |prec| {
            let (mid, _) = Dyadic::from_rational_trunc(
                &BigRational::new(BigInt::from(22), BigInt::from(7)),
                prec + 8,
            );
            Ok(Ball::new(mid, Dyadic::pow2(-(prec as i64)), prec))
        });
        let err = cf_quotients(&fuzzy, 5, &pol).unwrap_err();
        assert!(matches!(err, Error::PrecisionExhausted { .. }), "{err}");
    }

    #[test]
    fn log_ratio_matches_independent_oracle() {
        // first 60 partial quotients of log 2 / log alpha(3), computed with
        // an unrelated 2500-digit implementation
        let oracle: [u64; 60] = [
            1, 7, 3, 1, 1, 1, 4, 11, 15, 1, 1, 1, 1, 12, 1, 4, 129, 1, 48, 2, 4, 3, 10, 745, 1,
            16, 4, 2, 1, 2, 1, 10, 1, 8, 2, 1, 1, 1, 5, 1, 2, 1, 3, 7, 1, 2, 4, 1, 5, 2, 6, 1, 3,
            1, 10, 1, 4, 2, 1, 2,
        ];
        let pol = PrecisionPolicy::default();
        let tau = FnSource::new("log 2 / log alpha(3)", |prec| {
            let ctx = KFibContext::new(3, prec)?;
            let ln2 = Ball::from_i64(2, prec).ln()?;
            ln2.div(ctx.log_alpha())
        });
        let got = cf_quotients(&tau, 60, &pol).unwrap();
        let expect: Vec<BigInt> = oracle.iter().map(|&a| BigInt::from(a)).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn convergent_recurrences_and_coprimality() {
        let pol = PrecisionPolicy::default();
        let tau = FnSource::new("sqrt 3", |prec| {
            Ball::from_i64(3, prec).pow_ratio(&BigInt::one(), &BigInt::from(2))
        });
        let convs = cf_expand(&tau, 25, &pol).unwrap();
        for t in 2..convs.len() {
            assert_eq!(convs[t].p, &convs[t].a * &convs[t - 1].p + &convs[t - 2].p);
            assert_eq!(convs[t].q, &convs[t].a * &convs[t - 1].q + &convs[t - 2].q);
            assert!(convs[t].q > convs[t - 1].q, "denominators grow from t=2 on");
        }
        use num_integer::Integer;
        for c in &convs {
            assert!(c.p.gcd(&c.q).is_one(), "t={}", c.t);
        }
    }

    #[test]
    fn approximation_quality_bracket() {
        // q_t |tau q_t - p_t| < 1 and |tau - p/q| < 1/(q_t q_{t+1})
        let pol = PrecisionPolicy::default();
        let tau = FnSource::new("sqrt 2", |prec| {
            Ball::from_i64(2, prec).pow_ratio(&BigInt::one(), &BigInt::from(2))
        });
        let convs = cf_expand(&tau, 20, &pol).unwrap();
        let sharp = tau.eval(512).unwrap();
        let mut last_err: Option<BigRational> = None;
        for t in 0..convs.len() - 1 {
            let c = &convs[t];
            let next = &convs[t + 1];
            let approx = BigRational::new(c.p.clone(), c.q.clone());
            // |tau - p/q| bounds from the enclosure endpoints
            let lo = sharp.lo().to_rational() - &approx;
            let hi = sharp.hi().to_rational() - &approx;
            let err_hi = lo.abs().max(hi.abs());
            let cap = BigRational::new(BigInt::one(), &c.q * &next.q);
            assert!(err_hi < cap, "t={t}");
            // |tau q - p| strictly decreasing
            let scaled = err_hi * BigRational::from_integer(c.q.clone());
            if let Some(prev) = last_err.take() {
                assert!(scaled < prev, "t={t}");
            }
            last_err = Some(scaled);
        }
    }

    #[test]
    fn legendre_gap_holds_for_small_denominators() {
        // |tau - r/s| > 1/((a_max+2) s^2) for all s < 50 and nearest r
        let pol = PrecisionPolicy::default();
        let tau_src = FnSource::new("sqrt 7", |prec| {
            Ball::from_i64(7, prec).pow_ratio(&BigInt::one(), &BigInt::from(2))
        });
        let lb = legendre_bound(&tau_src, &BigInt::from(50), &pol).unwrap();
        let sharp = tau_src.eval(512).unwrap();
        let t_lo = sharp.lo().to_rational();
        let t_hi = sharp.hi().to_rational();
        for s in 1i64..50 {
            // candidate numerators around s*tau
            let mid = (&t_lo + &t_hi) / BigRational::from_integer(BigInt::from(2));
            let r0 = (mid * BigRational::from_integer(BigInt::from(s))).floor().to_integer();
            for dr in 0..=1 {
                let r = &r0 + BigInt::from(dr);
                let frac = BigRational::new(r, BigInt::from(s));
                let dist = (&t_lo - &frac).abs().min((&t_hi - &frac).abs());
                let gap = BigRational::new(
                    BigInt::one(),
                    (&lb.a_max + BigInt::from(2)) * BigInt::from(s * s),
                );
                assert!(dist > gap, "s={s}");
            }
        }
    }

    #[test]
    fn zero_threshold_rejected() {
        let pol = PrecisionPolicy::default();
        assert!(legendre_bound(&golden(), &BigInt::zero(), &pol).is_err());
    }
}
