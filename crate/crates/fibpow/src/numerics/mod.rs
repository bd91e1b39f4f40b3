//! Certified real arithmetic: exact dyadics, midpoint-radius balls,
//! fixed-point ln/exp cores, precision-escalation policies, and expression
//! evaluation.  Everything downstream (root isolation, height bounds,
//! lattice-free reduction, the final minimum scan) decides real-number
//! questions exclusively through this module, so a bug here would poison
//! every certificate; the tests are correspondingly paranoid.

mod ball;
mod dyadic;
mod expr;
mod functions;
mod policy;
mod real;

pub use ball::{Ball, RAD_BITS};
pub use dyadic::Dyadic;
pub use expr::{ball_eval, Expr};
pub use policy::PrecisionPolicy;
pub use real::{
    certified_compare, certified_floor, certified_le, certified_lt, certified_sign, ConstSource,
    FnSource, RationalSource, RealSource,
};
