//! Symbolic expressions in the two plane coordinates `x` and `y`.
//!
//! Expressions are immutable trees. They are parsed from the small infix
//! grammar described in [`parse`], evaluated at points in double precision,
//! differentiated symbolically, simplified into a sum-of-monomials normal
//! form, and integrated by a short list of antiderivative rules.

mod diff;
mod eval;
mod integrate;
mod parse;
mod simplify;

use std::cmp::Ordering;
use std::fmt;

pub use eval::EvalError;
pub use integrate::integrate_symbolic;
pub use parse::{parse, ParseError};
pub use simplify::simplify;

use crate::forms::{Domain, Point};

/// One of the two plane coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }

    pub fn other(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
        }
    }
}

/// Built-in unary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Atan,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Atan,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Atan => "atan",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree node.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn constant(value: f64) -> Expr {
        // -0.0 and 0.0 compare equal but order differently under total_cmp
        Expr::Const(if value == 0.0 { 0.0 } else { value })
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    pub fn x() -> Expr {
        Expr::Var(Var::X)
    }

    pub fn y() -> Expr {
        Expr::Var(Var::Y)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
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

    pub fn pow(self, exponent: Expr) -> Expr {
        Expr::Pow(Box::new(self), Box::new(exponent))
    }

    pub fn powi(self, exponent: i32) -> Expr {
        self.pow(Expr::constant(exponent as f64))
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call(func, Box::new(arg))
    }

    pub fn sin(self) -> Expr {
        Expr::call(Func::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::call(Func::Cos, self)
    }

    pub fn exp(self) -> Expr {
        Expr::call(Func::Exp, self)
    }

    pub fn log(self) -> Expr {
        Expr::call(Func::Log, self)
    }

    pub fn atan(self) -> Expr {
        Expr::call(Func::Atan, self)
    }

    pub fn sqrt(self) -> Expr {
        Expr::call(Func::Sqrt, self)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    /// Whether the variable occurs anywhere in the tree.
    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(v),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.depends_on(v) || b.depends_on(v),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.size(),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn eval(&self, p: Point) -> Result<f64, EvalError> {
        eval::eval(self, p)
    }

    pub fn eval_xy(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        eval::eval(self, Point::new(x, y))
    }

    /// Symbolic partial derivative, simplified.
    pub fn diff(&self, v: Var) -> Expr {
        diff::diff(self, v)
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    pub fn integrate(&self, v: Var) -> Option<Expr> {
        integrate::integrate_symbolic(self, v)
    }

    fn rank(&self) -> u8 {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(_) => 1,
            Expr::Call(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Neg(_) => 4,
            Expr::Mul(..) => 5,
            Expr::Div(..) => 6,
            Expr::Add(..) => 7,
            Expr::Sub(..) => 8,
        }
    }

    /// Total structural order used to canonicalize simplified output.
    pub fn total_cmp(&self, other: &Expr) -> Ordering {
        match (self, other) {
            (Expr::Const(a), Expr::Const(b)) => a.total_cmp(b),
            (Expr::Var(a), Expr::Var(b)) => a.cmp(b),
            (Expr::Call(f, a), Expr::Call(g, b)) => f.cmp(g).then_with(|| a.total_cmp(b)),
            (Expr::Neg(a), Expr::Neg(b)) => a.total_cmp(b),
            (Expr::Add(a1, b1), Expr::Add(a2, b2))
            | (Expr::Sub(a1, b1), Expr::Sub(a2, b2))
            | (Expr::Mul(a1, b1), Expr::Mul(a2, b2))
            | (Expr::Div(a1, b1), Expr::Div(a2, b2))
            | (Expr::Pow(a1, b1), Expr::Pow(a2, b2)) => {
                a1.total_cmp(a2).then_with(|| b1.total_cmp(b2))
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl From<f64> for Expr {
    fn from(value: f64) -> Self {
        Expr::constant(value)
    }
}

impl From<Var> for Expr {
    fn from(v: Var) -> Self {
        Expr::Var(v)
    }
}

// Printing levels mirror the grammar: sum < product < unary < power < atom.
const LEVEL_SUM: u8 = 0;
const LEVEL_PRODUCT: u8 = 1;
const LEVEL_UNARY: u8 = 2;
const LEVEL_ATOM: u8 = 4;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => LEVEL_SUM,
        Expr::Mul(..) | Expr::Div(..) => LEVEL_PRODUCT,
        Expr::Neg(_) => LEVEL_UNARY,
        Expr::Pow(..) => 3,
        Expr::Const(c) if c.is_sign_negative() => LEVEL_UNARY,
        Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => LEVEL_ATOM,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min_level: u8) -> fmt::Result {
    if level(e) < min_level {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Const(c) => {
            if c.is_sign_negative() {
                write!(f, "-{}", -c)
            } else {
                write!(f, "{c}")
            }
        }
        Expr::Var(v) => write!(f, "{}", v.name()),
        // `-2` would read back as a negative literal
        Expr::Neg(a) if matches!(**a, Expr::Const(c) if !c.is_sign_negative()) => {
            write!(f, "-({a})")
        }
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_at(f, a, LEVEL_UNARY)
        }
        Expr::Add(a, b) => {
            write_at(f, a, LEVEL_SUM)?;
            write!(f, " + ")?;
            write_at(f, b, LEVEL_PRODUCT)
        }
        Expr::Sub(a, b) => {
            write_at(f, a, LEVEL_SUM)?;
            write!(f, " - ")?;
            write_at(f, b, LEVEL_PRODUCT)
        }
        Expr::Mul(a, b) => {
            write_at(f, a, LEVEL_PRODUCT)?;
            write!(f, "*")?;
            write_at(f, b, LEVEL_UNARY)
        }
        Expr::Div(a, b) => {
            write_at(f, a, LEVEL_PRODUCT)?;
            write!(f, "/")?;
            write_at(f, b, LEVEL_UNARY)
        }
        Expr::Pow(a, b) => {
            write_at(f, a, LEVEL_ATOM)?;
            write!(f, "^")?;
            write_at(f, b, LEVEL_UNARY)
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a)?;
            write!(f, ")")
        }
    }
}

/// Prints in the input grammar; `parse(&e.to_string())` rebuilds `e`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}

/// Result of comparing two expressions modulo an additive constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantShift {
    pub equal: bool,
    /// Mean of `a - b` over the samples.
    pub offset: f64,
    /// Sample standard deviation of `a - b`.
    pub spread: f64,
    pub samples: usize,
}

/// Compares `a` and `b` up to an additive constant on quasi-random points of
/// `region`. Points where either side fails to evaluate are skipped.
pub fn equal_up_to_constant(
    a: &Expr,
    b: &Expr,
    region: &Domain,
    n: usize,
    tol: f64,
) -> Result<ConstantShift, crate::Error> {
    let points: Vec<Point> = region.sampler().take(n).collect();
    equal_up_to_constant_at(a, b, &points, tol)
}

/// Same comparison on an explicit list of points.
pub fn equal_up_to_constant_at(
    a: &Expr,
    b: &Expr,
    points: &[Point],
    tol: f64,
) -> Result<ConstantShift, crate::Error> {
    let diffs: Vec<f64> = points
        .iter()
        .filter_map(|&p| Some(a.eval(p).ok()? - b.eval(p).ok()?))
        .collect();
    constant_shift(&diffs, tol)
}

pub(crate) fn constant_shift(diffs: &[f64], tol: f64) -> Result<ConstantShift, crate::Error> {
    if diffs.len() < 2 {
        return Err(crate::Error::NoValidSamples {
            needed: 2,
            found: diffs.len(),
        });
    }
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let spread = var.sqrt();
    Ok(ConstantShift {
        equal: spread <= tol,
        offset: mean,
        spread,
        samples: diffs.len(),
    })
}
