//! Run configuration: a single optional TOML file, resolved over the desk
//! defaults, with a few values overridable from command-line flags.
//!
//! Numeric constants in the file travel as decimal strings ("2.64e35",
//! "0.0003") and are parsed into exact integers or rationals; TOML floats
//! are rejected wherever exactness matters, since they would round before
//! the parser ever sees them.  Ranges are written "3..74", inclusive on
//! both ends.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::heights::chain::PublishedBounds;
use crate::numerics::PrecisionPolicy;
use crate::search::{DEFAULT_MODULI, DEFAULT_WORK_BUDGET};

fn invalid(msg: impl Into<String>) -> Error {
    Error::ConfigInvalid(msg.into())
}

/// "a..b" inclusive on both ends ("a..=b" tolerated); a bare integer is the
/// one-point range.
pub fn parse_range(s: &str) -> Result<RangeInclusive<u64>> {
    let s = s.trim();
    let parse_end = |part: &str, whole: &str| -> Result<u64> {
        part.trim()
            .parse()
            .map_err(|_| invalid(format!("range bound {part:?} in {whole:?} is not an integer")))
    };
    if let Some((a, b)) = s.split_once("..") {
        let lo = parse_end(a, s)?;
        let hi = parse_end(b.strip_prefix('=').unwrap_or(b), s)?;
        if lo > hi {
            return Err(invalid(format!("range {s:?} is empty")));
        }
        Ok(lo..=hi)
    } else {
        let v = parse_end(s, s)?;
        Ok(v..=v)
    }
}

/// Exact rational from decimal scientific notation: "2.64e35", "0.0003",
/// "-1.7", "301".
pub fn parse_decimal_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (mantissa, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (
            m,
            e.parse::<i32>()
                .map_err(|_| invalid(format!("exponent {e:?} in {s:?} is not an integer")))?,
        ),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(invalid(format!("no digits in {s:?}")));
    }
    let digits: BigInt = format!("{int_part}{frac_part}")
        .parse()
        .map_err(|_| invalid(format!("bad decimal literal {s:?}")))?;
    let shift = exp10 as i64 - frac_part.len() as i64;
    let pow = BigInt::from(10u32).pow(shift.unsigned_abs() as u32);
    Ok(if shift >= 0 {
        BigRational::from(digits * pow)
    } else {
        BigRational::new(digits, pow)
    })
}

/// As `parse_decimal_rational`, but the value must be an integer
/// ("2.64e35" is fine, "2.645e2" is not).
pub fn parse_decimal_int(s: &str) -> Result<BigInt> {
    let r = parse_decimal_rational(s)?;
    if !r.is_integer() {
        return Err(invalid(format!("{s:?} is not an integer")));
    }
    Ok(r.to_integer())
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    precision: Option<PrecisionSection>,
    identities: Option<IdentitiesSection>,
    root: Option<RootSection>,
    reduce: Option<ReduceSection>,
    legendre: Option<LegendreSection>,
    search: Option<SearchSection>,
    #[serde(rename = "final-min")]
    final_min: Option<FinalMinSection>,
    published: Option<BTreeMap<String, toml::Value>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrecisionSection {
    initial_bits: Option<u32>,
    escalation_num: Option<u32>,
    escalation_den: Option<u32>,
    max_bits: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct IdentitiesSection {
    k_max: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RootSection {
    k: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReduceSection {
    k: Option<String>,
    m: Option<String>,
    /// Cap M as a decimal-integer string.
    cap: Option<String>,
    index: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LegendreSection {
    k: Option<String>,
    terms: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchSection {
    k: Option<String>,
    m: Option<String>,
    x: Option<String>,
    moduli: Option<Vec<u64>>,
    budget: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FinalMinSection {
    x: Option<String>,
    k: Option<String>,
    threshold: Option<String>,
}

#[derive(Clone, Debug)]
pub struct IdentitiesConfig {
    pub k_max: u64,
}

#[derive(Clone, Debug)]
pub struct RootConfig {
    pub k_range: RangeInclusive<u64>,
}

#[derive(Clone, Debug)]
pub struct ReduceConfig {
    pub k_range: RangeInclusive<u64>,
    pub m_range: RangeInclusive<u64>,
    pub cap: BigInt,
    pub start_index: usize,
}

#[derive(Clone, Debug)]
pub struct LegendreConfig {
    pub k_range: RangeInclusive<u64>,
    /// Partial quotients computed per order (indices 0..=terms).
    pub terms: usize,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub k_range: RangeInclusive<u64>,
    pub m_range: RangeInclusive<u64>,
    pub x_range: RangeInclusive<u64>,
    pub moduli: Vec<u64>,
    pub budget: u128,
}

#[derive(Clone, Debug)]
pub struct FinalMinConfig {
    pub x_range: RangeInclusive<u64>,
    pub k_range: RangeInclusive<u64>,
    pub threshold: BigRational,
}

/// Fully resolved configuration for a run.
#[derive(Clone, Debug)]
pub struct Config {
    pub policy: PrecisionPolicy,
    pub published: PublishedBounds,
    pub identities: IdentitiesConfig,
    pub root: RootConfig,
    pub reduce: ReduceConfig,
    pub legendre: LegendreConfig,
    pub search: SearchConfig,
    pub final_min: FinalMinConfig,
}

impl Default for Config {
    /// The desk preset: every stage sized to finish in seconds while still
    /// exercising the published constants.
    fn default() -> Self {
        Config {
            policy: PrecisionPolicy::default(),
            published: PublishedBounds::default(),
            identities: IdentitiesConfig { k_max: 100 },
            root: RootConfig { k_range: 3..=10 },
            reduce: ReduceConfig {
                k_range: 3..=5,
                m_range: 3..=6,
                cap: parse_decimal_int("2.64e35").expect("literal"),
                start_index: 700,
            },
            legendre: LegendreConfig {
                k_range: 3..=12,
                terms: 231,
            },
            search: SearchConfig {
                k_range: 3..=5,
                m_range: 3..=30,
                x_range: 2..=30,
                moduli: DEFAULT_MODULI.to_vec(),
                budget: DEFAULT_WORK_BUDGET,
            },
            final_min: FinalMinConfig {
                x_range: 20..=150,
                k_range: 3..=5,
                threshold: BigRational::new(3.into(), 10_000.into()),
            },
        }
    }
}

fn toml_rational(key: &str, value: &toml::Value) -> Result<BigRational> {
    match value {
        toml::Value::String(s) => parse_decimal_rational(s),
        toml::Value::Integer(i) => Ok(BigRational::from(BigInt::from(*i))),
        toml::Value::Float(_) => Err(invalid(format!(
            "published constant {key} must be a decimal string, not a float"
        ))),
        other => Err(invalid(format!(
            "published constant {key} has unsupported type {}",
            other.type_str()
        ))),
    }
}

fn toml_u64(key: &str, value: &toml::Value) -> Result<u64> {
    match value {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        toml::Value::String(s) => s
            .parse()
            .map_err(|_| invalid(format!("published constant {key} is not an integer"))),
        _ => Err(invalid(format!("published constant {key} must be an integer"))),
    }
}

fn apply_published(
    bounds: &mut PublishedBounds,
    overrides: &BTreeMap<String, toml::Value>,
) -> Result<()> {
    for (key, value) in overrides {
        match key.as_str() {
            "x_of_m_coeff" => bounds.x_of_m_coeff = toml_rational(key, value)?,
            "small_m_x" => bounds.small_m_x = toml_rational(key, value)?,
            "small_m_n" => bounds.small_m_n = toml_rational(key, value)?,
            "small_m_k" => bounds.small_m_k = toml_u64(key, value)?,
            "reduction_m" => bounds.reduction_m = toml_rational(key, value)?,
            "dp_a" => bounds.dp_a = toml_rational(key, value)?,
            "x_of_k_direct_coeff" => bounds.x_of_k_direct_coeff = toml_rational(key, value)?,
            "m_of_k_coeff" => bounds.m_of_k_coeff = toml_rational(key, value)?,
            "x_of_k_coeff" => bounds.x_of_k_coeff = toml_rational(key, value)?,
            "large_m_x" => bounds.large_m_x = toml_rational(key, value)?,
            "large_m_k" => bounds.large_m_k = toml_u64(key, value)?,
            "gamma2_bound" => bounds.gamma2_bound = toml_rational(key, value)?,
            "legendre_q_min" => bounds.legendre_q_min = toml_rational(key, value)?,
            "legendre_a_max" => bounds.legendre_a_max = toml_rational(key, value)?,
            "legendre_gap" => bounds.legendre_gap = toml_rational(key, value)?,
            "final_min" => bounds.final_min = toml_rational(key, value)?,
            "final_m" => bounds.final_m = toml_u64(key, value)?,
            other => return Err(invalid(format!("unknown published constant {other:?}"))),
        }
    }
    Ok(())
}

impl Config {
    /// Desk defaults overlaid with the file's sections, if a file is given.
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let mut cfg = Config::default();
        let Some(path) = path else { return Ok(cfg) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let file: FileConfig = toml::from_str(&text)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;

        if let Some(p) = file.precision {
            cfg.policy = PrecisionPolicy::new(
                p.initial_bits.unwrap_or(cfg.policy.initial_bits),
                p.escalation_num.unwrap_or(cfg.policy.escalation_num),
                p.escalation_den.unwrap_or(cfg.policy.escalation_den),
                p.max_bits.unwrap_or(cfg.policy.max_bits),
            )
            .map_err(|e| invalid(format!("precision section: {e}")))?;
        }
        if let Some(s) = file.identities {
            if let Some(k_max) = s.k_max {
                if k_max < 2 {
                    return Err(invalid("identities.k_max must be at least 2"));
                }
                cfg.identities.k_max = k_max;
            }
        }
        if let Some(s) = file.root {
            if let Some(k) = s.k {
                cfg.root.k_range = parse_range(&k)?;
            }
        }
        if let Some(s) = file.reduce {
            if let Some(k) = s.k {
                cfg.reduce.k_range = parse_range(&k)?;
            }
            if let Some(m) = s.m {
                cfg.reduce.m_range = parse_range(&m)?;
            }
            if let Some(cap) = s.cap {
                cfg.reduce.cap = parse_decimal_int(&cap)?;
            }
            if let Some(index) = s.index {
                cfg.reduce.start_index = index;
            }
        }
        if let Some(s) = file.legendre {
            if let Some(k) = s.k {
                cfg.legendre.k_range = parse_range(&k)?;
            }
            if let Some(terms) = s.terms {
                if terms == 0 {
                    return Err(invalid("legendre.terms must be positive"));
                }
                cfg.legendre.terms = terms;
            }
        }
        if let Some(s) = file.search {
            if let Some(k) = s.k {
                cfg.search.k_range = parse_range(&k)?;
            }
            if let Some(m) = s.m {
                cfg.search.m_range = parse_range(&m)?;
            }
            if let Some(x) = s.x {
                cfg.search.x_range = parse_range(&x)?;
            }
            if let Some(moduli) = s.moduli {
                cfg.search.moduli = moduli;
            }
            if let Some(budget) = s.budget {
                cfg.search.budget = budget as u128;
            }
        }
        if let Some(s) = file.final_min {
            if let Some(x) = s.x {
                cfg.final_min.x_range = parse_range(&x)?;
            }
            if let Some(k) = s.k {
                cfg.final_min.k_range = parse_range(&k)?;
            }
            if let Some(threshold) = s.threshold {
                let t = parse_decimal_rational(&threshold)?;
                if t <= BigRational::from(BigInt::from(0)) {
                    return Err(invalid("final-min.threshold must be positive"));
                }
                cfg.final_min.threshold = t;
            }
        }
        if let Some(published) = file.published {
            apply_published(&mut cfg.published, &published)?;
        }
        Ok(cfg)
    }
}
