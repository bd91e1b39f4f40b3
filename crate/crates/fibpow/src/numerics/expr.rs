//! A tiny expression tree evaluated in ball arithmetic.
//!
//! Used by the inequality-chain stages to keep each certified bound in a
//! declarative, inspectable form: the expression is built once and evaluated
//! at whatever precision the policy ladder asks for, with inputs (roots,
//! logs, previously certified quantities) supplied as enclosures.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::ball::Ball;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub enum Expr {
    /// Placeholder resolved from the input slice at evaluation time.
    Input(usize),
    Int(BigInt),
    Ratio(BigRational),
    Neg(Box<Expr>),
    Abs(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power (exponent zero is exact one).
    PowI(Box<Expr>, i64),
    /// Rational power, evaluated as exp(q ln base); base must be positive.
    PowQ(Box<Expr>, BigRational),
    Ln(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn input(i: usize) -> Expr {
        Expr::Input(i)
    }

    pub fn int(v: i64) -> Expr {
        Expr::Int(BigInt::from(v))
    }

    pub fn big(v: BigInt) -> Expr {
        Expr::Int(v)
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::Ratio(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn rational(q: BigRational) -> Expr {
        Expr::Ratio(q)
    }

    pub fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }

    pub fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }

    pub fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }

    pub fn powi(self, e: i64) -> Expr {
        Expr::PowI(Box::new(self), e)
    }

    pub fn pow_q(self, num: i64, den: i64) -> Expr {
        Expr::PowQ(Box::new(self), BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn ln(self) -> Expr {
        Expr::Ln(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }

    pub fn abs(self) -> Expr {
        Expr::Abs(Box::new(self))
    }
}

/// Evaluate `expr` over balls at working precision `prec`; `inputs` resolves
/// the `Input` placeholders.
pub fn ball_eval(expr: &Expr, inputs: &[Ball], prec: u32) -> Result<Ball> {
    match expr {
        Expr::Input(i) => inputs
            .get(*i)
            .map(|b| b.with_prec(prec.max(b.prec())))
            .ok_or_else(|| Error::Domain(format!("expression input {i} missing ({} supplied)", inputs.len()))),
        Expr::Int(v) => Ok(Ball::from_int(v, prec)),
        Expr::Ratio(q) => Ok(Ball::from_rational(q, prec)),
        Expr::Neg(e) => Ok(ball_eval(e, inputs, prec)?.neg()),
        Expr::Abs(e) => Ok(ball_eval(e, inputs, prec)?.abs()),
        Expr::Add(a, b) => Ok(ball_eval(a, inputs, prec)?.add(&ball_eval(b, inputs, prec)?)),
        Expr::Sub(a, b) => Ok(ball_eval(a, inputs, prec)?.sub(&ball_eval(b, inputs, prec)?)),
        Expr::Mul(a, b) => Ok(ball_eval(a, inputs, prec)?.mul(&ball_eval(b, inputs, prec)?)),
        Expr::Div(a, b) => ball_eval(a, inputs, prec)?.div(&ball_eval(b, inputs, prec)?),
        Expr::PowI(e, k) => ball_eval(e, inputs, prec)?.powi(*k),
        Expr::PowQ(e, q) => ball_eval(e, inputs, prec)?.pow_ratio(q.numer(), q.denom()),
        Expr::Ln(e) => ball_eval(e, inputs, prec)?.ln(),
        Expr::Exp(e) => ball_eval(e, inputs, prec)?.exp(),
    }
}
