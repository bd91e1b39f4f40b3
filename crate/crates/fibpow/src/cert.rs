//! Verification certificates.
//!
//! Every pipeline stage emits one certificate: which stage ran, with what
//! parameters, the quantities it certified, and a verdict.  The quantities
//! are chosen so the verdict can be rechecked without rerunning the stage;
//! big integers travel as decimal strings and enclosures as exact dyadic
//! mantissa/exponent pairs, because JSON numbers would silently round them.
//!
//! The on-disk format is one JSON document per line, append-only, so a log
//! survives partial runs and concatenates across shards.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::{Ball, Dyadic};

/// Pipeline stages, in run order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    KfibIdentities,
    Root,
    Heights,
    BoundChain,
    DpReduction,
    Search,
    Legendre,
    FinalMin,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::KfibIdentities => "kfib-identities",
            Stage::Root => "root",
            Stage::Heights => "heights",
            Stage::BoundChain => "bound-chain",
            Stage::DpReduction => "dp-reduction",
            Stage::Search => "search",
            Stage::Legendre => "legendre",
            Stage::FinalMin => "final-min",
        }
    }
}

/// What the stage concluded.  `Failed` means a check was decided and came
/// out false; `Error` means the stage could not decide (bad precision,
/// bad instance, I/O).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    Failed,
    Error,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Verified => "verified",
            Verdict::Failed => "failed",
            Verdict::Error => "error",
        }
    }
}

/// One certified value.  Integers and rationals are exact; a ball carries
/// its exact dyadic midpoint and radius plus a decimal rendering for human
/// readers (the rendering is redundant, never authoritative).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Quantity {
    Int {
        value: String,
    },
    Rational {
        numer: String,
        denom: String,
    },
    Ball {
        mant: String,
        exp2: i64,
        rad_mant: String,
        rad_exp2: i64,
        prec: u32,
        approx: String,
    },
    Bool {
        value: bool,
    },
    Text {
        value: String,
    },
}

impl Quantity {
    pub fn int(v: &BigInt) -> Self {
        Quantity::Int { value: v.to_string() }
    }

    pub fn uint(v: u64) -> Self {
        Quantity::Int { value: v.to_string() }
    }

    pub fn rational(v: &BigRational) -> Self {
        Quantity::Rational {
            numer: v.numer().to_string(),
            denom: v.denom().to_string(),
        }
    }

    pub fn ball(b: &Ball) -> Self {
        let rad = b.rad();
        Quantity::Ball {
            mant: b.mid().mant().to_string(),
            exp2: b.mid().exp(),
            rad_mant: rad.mant().to_string(),
            rad_exp2: rad.exp(),
            prec: b.prec(),
            approx: format!("{b}"),
        }
    }

    pub fn flag(v: bool) -> Self {
        Quantity::Bool { value: v }
    }

    pub fn text(v: impl Into<String>) -> Self {
        Quantity::Text { value: v.into() }
    }

    /// Reconstruct the exact enclosure from a ball quantity.
    pub fn try_to_ball(&self) -> Option<Ball> {
        if let Quantity::Ball {
            mant,
            exp2,
            rad_mant,
            rad_exp2,
            prec,
            ..
        } = self
        {
            let mid = Dyadic::new(mant.parse().ok()?, *exp2);
            let rad = Dyadic::new(rad_mant.parse().ok()?, *rad_exp2);
            let lo = mid.sub(&rad);
            let hi = mid.add(&rad);
            Some(Ball::from_endpoints(&lo, &hi, *prec))
        } else {
            None
        }
    }
}

/// A quantity with the name it is certified under.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedQuantity {
    pub name: String,
    #[serde(flatten)]
    pub quantity: Quantity,
}

/// One emitted certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub stage: Stage,
    pub verdict: Verdict,
    pub parameters: BTreeMap<String, String>,
    pub quantities: Vec<NamedQuantity>,
    pub timestamp: String,
    pub tool_version: String,
}

impl Certificate {
    /// Fresh certificate skeleton; quantities and verdict filled by the
    /// stage runner.
    pub fn new(stage: Stage, verdict: Verdict) -> Self {
        Certificate {
            stage,
            verdict,
            parameters: BTreeMap::new(),
            quantities: Vec::new(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.parameters.insert(key.into(), value.to_string());
        self
    }

    pub fn push(&mut self, name: impl Into<String>, quantity: Quantity) {
        self.quantities.push(NamedQuantity {
            name: name.into(),
            quantity,
        });
    }

    pub fn quantity(&self, name: &str) -> Option<&Quantity> {
        self.quantities
            .iter()
            .find(|q| q.name == name)
            .map(|q| &q.quantity)
    }

    /// The quantities section only: what determinism guarantees cover
    /// (timestamps legitimately differ between runs).
    pub fn quantities_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.quantities)?)
    }
}

/// Append-only JSON-lines sink.
pub struct CertWriter {
    out: BufWriter<File>,
}

impl CertWriter {
    pub fn append(path: impl AsRef<Path>) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(CertWriter {
            out: BufWriter::new(file),
        })
    }

    pub fn write(&mut self, cert: &Certificate) -> Result<()> {
        serde_json::to_writer(&mut self.out, cert)?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        Ok(())
    }
}

/// Parse every certificate in a JSON-lines log.
pub fn read_certificates(path: impl AsRef<Path>) -> Result<Vec<Certificate>> {
    let reader = BufReader::new(File::open(path)?);
    let mut certs = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        certs.push(serde_json::from_str(&line)?);
    }
    Ok(certs)
}
