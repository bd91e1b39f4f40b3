//! Baker–Davenport reduction in the Dujella–Pethő form.
//!
//! The bound chain leaves an inequality 0 < |u·γ − v + μ| < A·B^(−u) that
//! every surviving solution would satisfy, with γ irrational and u capped by
//! some enormous M.  The reduction kills the cap: pick a convergent
//! denominator q of γ with q > 6M and set ε = ‖μq‖ − M·‖γq‖ (‖·‖ is the
//! distance to the nearest integer).  Whenever ε > 0, no solution has
//!
//!   log(A·q / ε) / log B  <  u  ≤  M,
//!
//! so the astronomic cap collapses to a few tens of thousands.  Nothing
//! about this is heuristic, but it only works when ε comes out positive;
//! occasionally ‖μq‖ lands too close to an integer and the next convergent
//! has to be tried.  `dp_reduce_cell` automates that retry, and everything
//! it reports is certified: ε is an enclosure whose lower endpoint is
//! positive, and the returned cutoff is the floor of a rigorous upper bound
//! on log(Aq/ε)/log B.
//!
//! The proof grid instantiates one cell per pair (m, k): γ and μ are ratios
//! of logarithms of the dominant root α, the companion constant g, and the
//! integer F_{m+1}, while A, B stay fixed across the grid.  Convergent
//! denominators at the index the grid uses run to hundreds of digits, and ε
//! can be as small as 10^(−214); the cell evaluations therefore start at
//! 4096 bits instead of walking the default precision ladder up from 256.

use std::cmp::Ordering;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;

use crate::contfrac::cf_expand;
use crate::error::{Error, Result};
use crate::kfib::kfib_at;
use crate::numerics::{Ball, Dyadic, FnSource, PrecisionPolicy, RealSource};
use crate::roots::KFibContext;

/// How many convergent indices past `start_index` a cell may advance while
/// hunting for a positive ε before giving up.
const ADVANCE_CAP: usize = 40;

/// Working precision floor for cell evaluations (see the module doc).
const CELL_START_BITS: u32 = 4096;

/// One reduction problem: certify that 0 < |u·γ − v + μ| < A·B^(−u) has no
/// integer solutions with u_bound < u ≤ M.
///
/// `m` and `k` label the grid cell the instance came from; synthetic
/// instances (tests, experiments) may put anything there.  A is kept as an
/// exact rational and B as an exact `b_base^(1/b_root)`, so every
/// re-evaluation at higher precision starts from the same numbers.
pub struct ReductionInstance {
    pub m: u64,
    pub k: u64,
    pub gamma: Box<dyn RealSource>,
    pub mu: Box<dyn RealSource>,
    pub a_const: BigRational,
    pub b_base: BigRational,
    pub b_root: u64,
    /// The cap M on the coefficient u.
    pub m_cap: BigInt,
}

impl ReductionInstance {
    /// Enclosure of the inequality coefficient A.
    pub fn a(&self, prec: u32) -> Ball {
        Ball::from_rational(&self.a_const, prec)
    }

    /// Enclosure of the inequality base B = b_base^(1/b_root).
    pub fn b(&self, prec: u32) -> Result<Ball> {
        Ball::from_rational(&self.b_base, prec)
            .pow_ratio(&BigInt::one(), &BigInt::from(self.b_root))
    }

    fn validate(&self) -> Result<()> {
        if !self.a_const.is_positive() {
            return Err(Error::InvalidInstance(format!(
                "inequality coefficient A = {} must be positive",
                self.a_const
            )));
        }
        if self.b_root == 0 {
            return Err(Error::InvalidInstance("base root must be at least 1".into()));
        }
        if self.b_base <= BigRational::one() {
            return Err(Error::InvalidInstance(format!(
                "inequality base {}^(1/{}) does not exceed 1",
                self.b_base, self.b_root
            )));
        }
        if !self.m_cap.is_positive() {
            return Err(Error::InvalidInstance(format!(
                "coefficient cap M = {} must be positive",
                self.m_cap
            )));
        }
        Ok(())
    }
}

/// A certified reduction: no solution has `u_bound < u ≤ m_cap`.
#[derive(Clone, Debug)]
pub struct ReductionOutcome {
    pub m: u64,
    pub k: u64,
    /// Index of the accepted convergent in the expansion of γ (0-based).
    pub convergent_index: usize,
    /// Its denominator q, certified > 6M.
    pub q: BigInt,
    /// Enclosure of ε = ‖μq‖ − M·‖γq‖ with a positive lower endpoint.
    pub epsilon: Ball,
    /// Floor of a rigorous upper bound on log(Aq/ε)/log B.
    pub u_bound: BigInt,
}

/// Distance from the enclosed value to its nearest integer.
///
/// The candidate integer n is read off the midpoint; the enclosure must then
/// fit inside [n − 1/2, n + 1/2] or the nearest integer itself is ambiguous
/// and the caller has to refine.  Endpoint arithmetic is exact (dyadic), so
/// the only looseness is the final re-rounding of the midpoint.
pub fn dist_to_nearest_int(b: &Ball) -> Result<Ball> {
    let half = Dyadic::pow2(-1);
    let nearest = Dyadic::from_bigint(b.mid().add(&half).floor_int());
    let t_lo = b.lo().sub(&nearest);
    let t_hi = b.hi().sub(&nearest);
    if t_lo.cmp_val(&half.neg()) == Ordering::Less || t_hi.cmp_val(&half) == Ordering::Greater {
        return Err(Error::NotSeparated {
            context: format!("nearest integer of {b} is ambiguous"),
        });
    }
    if !t_lo.is_negative() {
        // entirely at or above n
        Ok(Ball::from_endpoints(&t_lo, &t_hi, b.prec()))
    } else if !t_hi.is_positive() {
        // entirely at or below n
        Ok(Ball::from_endpoints(&t_hi.neg(), &t_lo.neg(), b.prec()))
    } else {
        // straddles n: distance starts at zero
        let t_lo = t_lo.neg();
        let far = if t_lo.cmp_val(&t_hi) == Ordering::Greater { t_lo } else { t_hi };
        Ok(Ball::from_endpoints(&Dyadic::zero(), &far, b.prec()))
    }
}

/// ε = ‖μq‖ − M·‖γq‖ at one working precision, with its sign certified.
fn epsilon_at(inst: &ReductionInstance, q: &BigInt, prec: u32) -> Result<Ball> {
    let gamma_q = inst.gamma.eval(prec)?.mul_int(q);
    let mu_q = inst.mu.eval(prec)?.mul_int(q);
    let eps = dist_to_nearest_int(&mu_q)?
        .sub(&dist_to_nearest_int(&gamma_q)?.mul_int(&inst.m_cap));
    if eps.try_sign().is_none() {
        return Err(Error::NotSeparated {
            context: format!(
                "sign of epsilon for cell (m={}, k={}) at q = {q}",
                inst.m, inst.k
            ),
        });
    }
    Ok(eps)
}

/// Floor of an upper bound on log(Aq/ε)/log B.  Requires ε certified
/// positive.  Taking the floor of the enclosure's upper endpoint keeps the
/// result a valid exclusion threshold even when the enclosure brackets an
/// integer, so no separation is demanded here.
fn u_bound_at(inst: &ReductionInstance, q: &BigInt, eps: &Ball, prec: u32) -> Result<BigInt> {
    let ratio = inst.a(prec).mul_int(q).div(eps)?;
    let exponent = ratio.ln()?.div(&inst.b(prec)?.ln()?)?;
    Ok(exponent.hi().floor_int())
}

/// Run the reduction for one instance, starting at the given convergent
/// index and advancing past any convergent whose ε is not certified
/// positive (up to a fixed cap).  Convergents come from one exact expansion
/// of γ; only the ε evaluation escalates precision.
pub fn dp_reduce_cell(
    inst: &ReductionInstance,
    start_index: usize,
    policy: &PrecisionPolicy,
) -> Result<ReductionOutcome> {
    inst.validate()?;
    let cell_policy = policy.starting_at(CELL_START_BITS);
    let six_m: BigInt = &inst.m_cap * 6;
    let end = start_index + ADVANCE_CAP;
    let convergents = cf_expand(inst.gamma.as_ref(), end + 1, &cell_policy)?;
    for conv in convergents.iter().skip(start_index) {
        if conv.q <= six_m {
            continue;
        }
        let (epsilon, accepted) = cell_policy.run(|prec| {
            let eps = epsilon_at(inst, &conv.q, prec)?;
            if eps.lo().is_positive() {
                let bound = u_bound_at(inst, &conv.q, &eps, prec)?;
                Ok((eps, Some(bound)))
            } else {
                Ok((eps, None))
            }
        })?;
        if let Some(u_bound) = accepted {
            return Ok(ReductionOutcome {
                m: inst.m,
                k: inst.k,
                convergent_index: conv.t,
                q: conv.q.clone(),
                epsilon,
                u_bound,
            });
        }
    }
    Err(Error::NoPositiveEpsilon {
        m: inst.m,
        k: inst.k,
        start: start_index,
        end,
    })
}

/// Build the grid instance for cell (m, k):
///
///   γ = log α / log F_{m+1},   μ = −log(α / g) / log F_{m+1},
///   A = 3.01,                  B = 2.3^(1/1457).
pub fn proof_cell(m: u64, k: u64, m_cap: BigInt) -> Result<ReductionInstance> {
    if k < 3 || m < k {
        return Err(Error::InvalidInstance(format!(
            "grid cell (m={m}, k={k}) needs k >= 3 and m >= k"
        )));
    }
    let f = kfib_at(k, m as i64 + 1)?;
    let log_f = {
        let f = f.clone();
        move |prec: u32| Ball::from_int(&f, prec).ln()
    };
    let gamma = {
        let log_f = log_f.clone();
        FnSource::new(format!("log alpha({k}) / log F({m}+1)"), move |prec| {
            let ctx = KFibContext::new(k, prec)?;
            ctx.log_alpha().div(&log_f(prec)?)
        })
    };
    let mu = FnSource::new(format!("-log(alpha({k})/g({k})) / log F({m}+1)"), move |prec| {
        let ctx = KFibContext::new(k, prec)?;
        let num = ctx.g().ln()?.sub(ctx.log_alpha());
        num.div(&log_f(prec)?)
    });
    Ok(ReductionInstance {
        m,
        k,
        gamma: Box::new(gamma),
        mu: Box::new(mu),
        a_const: BigRational::new(BigInt::from(301), BigInt::from(100)),
        b_base: BigRational::new(BigInt::from(23), BigInt::from(10)),
        b_root: 1457,
        m_cap,
    })
}

/// One cell of a grid run that did not produce an outcome.
#[derive(Clone, Debug)]
pub struct CellFailure {
    pub m: u64,
    pub k: u64,
    pub message: String,
}

/// Outcomes and summary statistics of a grid run.
///
/// `max_u_bound` is the payoff: no cell admits a solution with
/// u > max_u_bound (and u ≤ M), so it is the surviving global cap.
#[derive(Debug, Default)]
pub struct GridReport {
    /// Per-cell outcomes in (m, k) order.
    pub outcomes: Vec<ReductionOutcome>,
    pub failures: Vec<CellFailure>,
    /// Cells excluded up front by the k ≥ 3, k ≤ m shape of the grid.
    pub skipped: usize,
    pub min_q: Option<BigInt>,
    pub max_q: Option<BigInt>,
    /// The grid-wide smallest ε, by certified lower endpoint.
    pub min_epsilon: Option<Ball>,
    pub max_u_bound: Option<BigInt>,
}

/// Reduce every feasible cell with m and k in the given ranges.  Cells run
/// in parallel; failures are collected per cell rather than aborting the
/// grid, since one stubborn ε should not hide the other results.
pub fn dp_reduce_grid(
    m_range: RangeInclusive<u64>,
    k_range: RangeInclusive<u64>,
    m_cap: &BigInt,
    start_index: usize,
    policy: &PrecisionPolicy,
) -> Result<GridReport> {
    let mut cells = Vec::new();
    let mut skipped = 0usize;
    for m in m_range.clone() {
        for k in k_range.clone() {
            if k >= 3 && k <= m {
                cells.push((m, k));
            } else {
                skipped += 1;
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::InvalidInstance(format!(
            "no feasible grid cell has m in {m_range:?} and k in {k_range:?}"
        )));
    }
    let results: Vec<(u64, u64, Result<ReductionOutcome>)> = cells
        .par_iter()
        .map(|&(m, k)| {
            let res = proof_cell(m, k, m_cap.clone())
                .and_then(|inst| dp_reduce_cell(&inst, start_index, policy));
            (m, k, res)
        })
        .collect();

    let mut report = GridReport {
        skipped,
        ..GridReport::default()
    };
    for (m, k, res) in results {
        match res {
            Ok(out) => {
                report.min_q = Some(match report.min_q.take() {
                    Some(cur) => cur.min(out.q.clone()),
                    None => out.q.clone(),
                });
                report.max_q = Some(match report.max_q.take() {
                    Some(cur) => cur.max(out.q.clone()),
                    None => out.q.clone(),
                });
                let sharper = match &report.min_epsilon {
                    Some(cur) => out.epsilon.lo().cmp_val(&cur.lo()) == Ordering::Less,
                    None => true,
                };
                if sharper {
                    report.min_epsilon = Some(out.epsilon.clone());
                }
                report.max_u_bound = Some(match report.max_u_bound.take() {
                    Some(cur) => cur.max(out.u_bound.clone()),
                    None => out.u_bound.clone(),
                });
                report.outcomes.push(out);
            }
            Err(err) => report.failures.push(CellFailure {
                m,
                k,
                message: err.to_string(),
            }),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{ToPrimitive, Zero};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

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

    fn ball(num: i64, den: i64, prec: u32) -> Ball {
        Ball::from_rational(&BigRational::new(num.into(), den.into()), prec)
    }

    /// Floor of 2^128 times the fractional part.
    fn fixed_point(d: &Dyadic) -> u128 {
        let r = d.to_rational();
        let frac = &r - r.floor();
        ((frac.numer() << 128u32) / frac.denom()).to_u128().unwrap()
    }

    /// Exhaustive check that no u in (lo, hi] puts u·γ + μ within A·B^(−u)
    /// of an integer: exactly the exclusion a reduction outcome promises.
    ///
    /// The orbit runs in 128-bit fixed point (units of 2^(−128)).  Each step
    /// truncates once, so after u steps the position is off by at most u + 2
    /// units (one more each for the μ truncation and the ball midpoints).
    /// Comparing against a single threshold rung A·B^(−(lo+1)) padded by
    /// that budget is therefore rigorous; rare dips below the padded rung
    /// fall back to a per-u interval evaluation at full precision.
    fn no_violations(gamma: &Ball, mu: &Ball, a: &BigRational, b: &Ball, lo: u64, hi: u64) -> bool {
        let rung = Ball::from_rational(a, 256)
            .mul(&b.powi(-(lo as i64) - 1).unwrap())
            .hi()
            .to_rational();
        assert!(rung.is_positive());
        let rung_fp = ((rung.numer() << 128u32) / rung.denom() + 1u32)
            .to_u128()
            .unwrap_or(u128::MAX)
            .saturating_add(hi as u128 + 4);

        let exact_ok = |u: u64| {
            let value = gamma.mul_int(&BigInt::from(u)).add(mu);
            let d = dist_to_nearest_int(&value).unwrap();
            let cap = Ball::from_rational(a, 256).mul(&b.powi(-(u as i64)).unwrap());
            d.lo().cmp_val(&cap.hi()) == Ordering::Greater
        };

        let step = fixed_point(gamma.mid());
        let mut t = fixed_point(mu.mid());
        for u in 1..=hi {
            t = t.wrapping_add(step);
            if u <= lo {
                continue;
            }
            let d = t.min(t.wrapping_neg());
            if d < rung_fp && !exact_ok(u) {
                return false;
            }
        }
        true
    }

    #[test]
    fn nearest_integer_distance_handles_all_window_shapes() {
        let prec = 64;
        // exactly representable points
        let d = dist_to_nearest_int(&ball(9, 4, prec)).unwrap();
        assert!(d.contains_rational(&BigRational::new(1.into(), 4.into())));
        let d = dist_to_nearest_int(&ball(-3, 8, prec)).unwrap();
        assert!(d.contains_rational(&BigRational::new(3.into(), 8.into())));
        let d = dist_to_nearest_int(&ball(3, 1, prec)).unwrap();
        assert!(d.try_sign() == Some(0) || d.lo().is_zero());

        // window straddling an integer: distance interval starts at zero
        let w = Ball::from_endpoints(&Dyadic::new(15.into(), -3), &Dyadic::new(17.into(), -3), prec);
        let d = dist_to_nearest_int(&w).unwrap();
        assert!(d.lo().is_zero());
        assert!(d.hi().to_rational() >= BigRational::new(1.into(), 8.into()));
        assert!(d.hi().to_rational() <= BigRational::new(1.into(), 4.into()));

        // window reaching a half-integer: ambiguous, must refine
        let w = Ball::from_endpoints(&Dyadic::new(19.into(), -3), &Dyadic::new(21.into(), -3), prec);
        assert!(matches!(
            dist_to_nearest_int(&w),
            Err(Error::NotSeparated { .. })
        ));
    }

    #[test]
    fn proof_cell_sources_match_reference_digits() {
        let inst = proof_cell(3, 3, BigInt::from(1000)).unwrap();
        assert_encloses(&inst.gamma.eval(256).unwrap(), "0.43957321080331908474851038010347");
        assert_encloses(&inst.mu.eval(256).unwrap(), "-0.78624386012238880901097964265413");
        assert_eq!(inst.a_const, BigRational::new(301.into(), 100.into()));
        assert_eq!(inst.b_base, BigRational::new(23.into(), 10.into()));
        assert_eq!(inst.b_root, 1457);
        let b = inst.b(256).unwrap();
        assert!(b.lo().to_rational() > BigRational::one());
        assert!(b.hi().to_rational() < BigRational::new(10007.into(), 10000.into()));
        assert!(proof_cell(3, 4, BigInt::one()).is_err());
        assert!(proof_cell(5, 2, BigInt::one()).is_err());
    }

    #[test]
    fn desk_cell_reduction_matches_oracle_and_survives_brute_force() {
        let m_cap = BigInt::from(1_000_000u64);
        let inst = proof_cell(3, 3, m_cap.clone()).unwrap();
        let out = dp_reduce_cell(&inst, 0, &PrecisionPolicy::default()).unwrap();
        assert_eq!(out.convergent_index, 15);
        assert_eq!(out.q, BigInt::from(10_100_818u64));
        assert!(out.q > &m_cap * 6);
        assert!(out.epsilon.lo().is_positive());
        assert_encloses(&out.epsilon, "0.094584678364177201316");
        assert_eq!(out.u_bound, BigInt::from(34_265u64));

        // every u in (34265, 10^6] must clear the inequality
        let prec = 256;
        let gamma = inst.gamma.eval(prec).unwrap();
        let mu = inst.mu.eval(prec).unwrap();
        let b = inst.b(prec).unwrap();
        assert!(no_violations(&gamma, &mu, &inst.a_const, &b, 34_265, 1_000_000));
    }

    #[test]
    fn tiny_cap_accepts_the_first_sizeable_convergent() {
        let inst = proof_cell(3, 3, BigInt::one()).unwrap();
        let out = dp_reduce_cell(&inst, 0, &PrecisionPolicy::default()).unwrap();
        assert_eq!(out.convergent_index, 2);
        assert_eq!(out.q, BigInt::from(7));
        assert!(out.epsilon.lo().is_positive());
        assert_encloses(&out.epsilon, "0.419280503520045");
    }

    #[test]
    fn certified_epsilon_survives_extra_precision() {
        let inst = proof_cell(4, 3, BigInt::from(1_000_000u64)).unwrap();
        let out = dp_reduce_cell(&inst, 0, &PrecisionPolicy::default()).unwrap();
        assert_eq!(out.convergent_index, 14);
        assert_eq!(out.q, BigInt::from(8_418_893u64));
        assert_eq!(out.u_bound, BigInt::from(31_372u64));
        let coarse = epsilon_at(&inst, &out.q, CELL_START_BITS).unwrap();
        let fine = epsilon_at(&inst, &out.q, 2 * CELL_START_BITS).unwrap();
        assert!(coarse.lo().is_positive());
        assert!(fine.lo().is_positive());
        // the finer enclosure sits inside the coarser one
        assert!(fine.lo().cmp_val(&coarse.lo()) != Ordering::Less);
        assert!(fine.hi().cmp_val(&coarse.hi()) != Ordering::Greater);
    }

    #[test]
    fn grid_filters_infeasible_cells_and_aggregates_the_rest() {
        let report = dp_reduce_grid(
            3..=4,
            3..=10,
            &BigInt::from(1000),
            0,
            &PrecisionPolicy::default(),
        )
        .unwrap();
        // feasible: (3,3), (4,3), (4,4); the other 13 pairs have k > m
        assert_eq!(report.outcomes.len(), 3);
        assert_eq!(report.skipped, 13);
        assert!(report.failures.is_empty());
        let labels: Vec<(u64, u64)> = report.outcomes.iter().map(|o| (o.m, o.k)).collect();
        assert_eq!(labels, vec![(3, 3), (4, 3), (4, 4)]);
        let qs: Vec<&BigInt> = report.outcomes.iter().map(|o| &o.q).collect();
        assert_eq!(*qs[0], BigInt::from(9466));
        assert_eq!(*qs[1], BigInt::from(6741));
        assert_eq!(*qs[2], BigInt::from(21_100));
        assert_eq!(report.min_q, Some(BigInt::from(6741)));
        assert_eq!(report.max_q, Some(BigInt::from(21_100)));
        assert_eq!(report.max_u_bound, Some(BigInt::from(23_829)));
        let min_eps = report.min_epsilon.unwrap();
        assert_encloses(&min_eps, "0.0770303285344");
        for out in &report.outcomes {
            assert!(out.q > BigInt::from(6000));
            assert!(out.epsilon.lo().is_positive());
            assert!(min_eps.lo().cmp_val(&out.epsilon.lo()) != Ordering::Greater);
        }
    }

    #[test]
    fn empty_grid_is_rejected() {
        let err = dp_reduce_grid(3..=5, 6..=9, &BigInt::one(), 0, &PrecisionPolicy::default());
        assert!(matches!(err, Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn instance_validation_rejects_bad_constants() {
        let mut inst = proof_cell(3, 3, BigInt::from(10)).unwrap();
        inst.a_const = BigRational::zero();
        assert!(matches!(
            dp_reduce_cell(&inst, 0, &PrecisionPolicy::default()),
            Err(Error::InvalidInstance(_))
        ));
        let mut inst = proof_cell(3, 3, BigInt::from(10)).unwrap();
        inst.b_base = BigRational::one();
        assert!(dp_reduce_cell(&inst, 0, &PrecisionPolicy::default()).is_err());
        let mut inst = proof_cell(3, 3, BigInt::from(10)).unwrap();
        inst.m_cap = BigInt::from(-5);
        assert!(dp_reduce_cell(&inst, 0, &PrecisionPolicy::default()).is_err());
    }

    /// Random quadratic irrationals, with B close enough to 1 that the
    /// reported cutoff usually leaves a real range to sweep.  The lemma's
    /// exclusion must hold on every swept u.
    #[test]
    fn random_instances_are_sound_against_brute_force() {
        let mut rng = StdRng::seed_from_u64(0x5eed_da7a);
        let policy = PrecisionPolicy::default();
        let mut reduced = 0usize;
        let mut swept = 0usize;
        for trial in 0..100u64 {
            let d = loop {
                let d = rng.gen_range(2i64..200);
                let r = (d as f64).sqrt() as i64;
                if r * r != d {
                    break d;
                }
            };
            let c = rng.gen_range(20i64..50);
            let e = rng.gen_range(2i64..200);
            let c2 = rng.gen_range(3i64..30);
            let shift = rng.gen_range(-4i64..=4);
            let gamma = FnSource::new(format!("sqrt({d})/{c}"), move |prec| {
                Ball::from_i64(d, prec)
                    .pow_ratio(&BigInt::one(), &BigInt::from(2))?
                    .div(&Ball::from_i64(c, prec))
            });
            let mu = FnSource::new(format!("(sqrt({e})+{shift})/{c2}"), move |prec| {
                let root = Ball::from_i64(e, prec).pow_ratio(&BigInt::one(), &BigInt::from(2))?;
                root.add(&Ball::from_i64(shift, prec)).div(&Ball::from_i64(c2, prec))
            });
            let inst = ReductionInstance {
                m: 0,
                k: 0,
                gamma: Box::new(gamma),
                mu: Box::new(mu),
                a_const: BigRational::new(rng.gen_range(1i64..=4).into(), 1.into()),
                b_base: BigRational::new(rng.gen_range(105i64..150).into(), 100.into()),
                b_root: 1,
                m_cap: BigInt::from(rng.gen_range(100u64..=10_000)),
            };
            match dp_reduce_cell(&inst, 0, &policy) {
                Ok(out) => {
                    reduced += 1;
                    assert!(out.q > &inst.m_cap * 6, "trial {trial}: q not past 6M");
                    assert!(out.epsilon.lo().is_positive(), "trial {trial}: epsilon not positive");
                    let cap = inst.m_cap.to_u64().unwrap();
                    let lo = out.u_bound.to_u64().unwrap_or(cap);
                    if lo < cap {
                        swept += 1;
                        let gamma = inst.gamma.eval(256).unwrap();
                        let mu = inst.mu.eval(256).unwrap();
                        let b = inst.b(256).unwrap();
                        assert!(
                            no_violations(&gamma, &mu, &inst.a_const, &b, lo, cap),
                            "trial {trial}: exclusion violated in ({lo}, {cap}]"
                        );
                    }
                }
                Err(Error::NoPositiveEpsilon { .. }) => {}
                Err(err) => panic!("trial {trial}: unexpected error {err}"),
            }
        }
        // the construction should reduce nearly every instance, and most
        // cutoffs should land inside the sweep range
        assert!(reduced >= 80, "only {reduced} of 100 instances reduced");
        assert!(swept >= 50, "only {swept} sweeps exercised");
    }
}
