use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::forms::Point;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation failed at ({}, {}): {source}", .at.x, .at.y)]
    Eval { at: Point, source: EvalError },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
    #[error("not enough valid sample points: needed {needed}, found {found}")]
    NoValidSamples { needed: usize, found: usize },
    #[error("quadrature did not converge after {panels} panels (last change {change:e})")]
    QuadratureNonConvergence { panels: usize, change: f64 },
    #[error("form is not closed (max residual {residual:e}); periods are not homotopy invariant")]
    NotClosed { residual: f64 },
    #[error("form is not exact on the domain: {0}")]
    NotExact(String),
    #[error("point ({}, {}) is outside the domain", .0.x, .0.y)]
    OutsideDomain(Point),
    #[error("no admissible path to ({}, {}): blocked by puncture ({}, {})", .target.x, .target.y, .puncture.x, .puncture.y)]
    NoAdmissiblePath { target: Point, puncture: Point },
    #[error("{0}")]
    Degenerate(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
