use thiserror::Error;

use super::{Expr, Func, Var};
use crate::forms::Point;

/// Evaluation failures. Non-finite intermediate values are reported rather
/// than propagated.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of non-positive value {0}")]
    LogNonPositive(f64),
    #[error("square root of negative value {0}")]
    SqrtNegative(f64),
    #[error("negative base {base} raised to non-integer power {exponent}")]
    FractionalPowerOfNegative { base: f64, exponent: f64 },
    #[error("non-finite result")]
    NonFinite,
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

pub(crate) fn apply_func(func: Func, a: f64) -> Result<f64, EvalError> {
    let v = match func {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Exp => a.exp(),
        Func::Atan => a.atan(),
        Func::Log => {
            if a <= 0.0 {
                return Err(EvalError::LogNonPositive(a));
            }
            a.ln()
        }
        Func::Sqrt => {
            if a < 0.0 {
                return Err(EvalError::SqrtNegative(a));
            }
            a.sqrt()
        }
    };
    finite(v)
}

pub(crate) fn apply_pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(EvalError::FractionalPowerOfNegative { base, exponent });
    }
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        return finite(base.powi(exponent as i32));
    }
    finite(base.powf(exponent))
}

pub(crate) fn apply_div(a: f64, b: f64) -> Result<f64, EvalError> {
    if b == 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    finite(a / b)
}

pub(crate) fn eval(e: &Expr, p: Point) -> Result<f64, EvalError> {
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::Var(Var::X) => Ok(p.x),
        Expr::Var(Var::Y) => Ok(p.y),
        Expr::Neg(a) => Ok(-eval(a, p)?),
        Expr::Add(a, b) => finite(eval(a, p)? + eval(b, p)?),
        Expr::Sub(a, b) => finite(eval(a, p)? - eval(b, p)?),
        Expr::Mul(a, b) => finite(eval(a, p)? * eval(b, p)?),
        Expr::Div(a, b) => apply_div(eval(a, p)?, eval(b, p)?),
        Expr::Pow(a, b) => apply_pow(eval(a, p)?, eval(b, p)?),
        Expr::Call(func, a) => apply_func(*func, eval(a, p)?),
    }
}
