//! Certified verification that the difference of two x-th powers of
//! neighbouring k-generalized Fibonacci numbers is never itself a term of
//! the sequence once x >= 2 and 3 <= k <= min(m, log x).
//!
//! The argument runs in stages, each of which this crate re-derives with
//! rigorous enclosures instead of floating point:
//!
//! 1. integer identities of the order-k sequences ([`kfib`]),
//! 2. isolation of the dominant characteristic root and the Binet-style
//!    coefficient ([`roots`]),
//! 3. linear forms in logarithms: explicit lower-bound engines and the
//!    inequality chain that caps x, n, m and k ([`heights`]),
//! 4. lattice-free reduction of the remaining grid via convergent
//!    denominators ([`reduction`]) and Legendre-style approximation
//!    bounds ([`contfrac`]),
//! 5. exhaustive modular search over the residual box plus the closing
//!    minimum scan ([`search`]).
//!
//! Every stage emits a machine-checkable certificate (see [`cert`]); the
//! command line front end in `main.rs` wires the stages into a pipeline.

pub mod cert;
pub mod config;
pub mod contfrac;
pub mod error;
pub mod heights;
pub mod kfib;
pub mod numerics;
pub mod reduction;
pub mod roots;
pub mod search;
pub mod stages;

pub use error::{Error, Result};
