//! Symbolic-numeric analysis of first-order ODEs `M dx + N dy = 0` viewed as
//! 1-forms on a rectangle with finitely many punctures.
//!
//! The pipeline classifies a form as exact, closed but not exact, or not
//! closed; measures the obstruction to exactness through its periods around
//! the punctures; searches for an integrating factor when the form is not
//! closed; and reconstructs a potential `F` whose level sets `F = C` are the
//! solution curves.
//!
//! ```
//! use deform_core::{analysis, forms::{Domain, OneForm}};
//!
//! let form = OneForm::parse("2*x*y + 1", "x^2 + cos(y)").unwrap();
//! let domain = Domain::rectangle(-2.0, 2.0, -2.0, 2.0).unwrap();
//! let report = analysis::analyze(&form, &domain, &analysis::Options::default()).unwrap();
//! assert_eq!(report.tag, analysis::Tag::ExactGlobalSolution);
//! ```

pub mod analysis;
pub mod cohomology;
mod error;
pub mod exec;
pub mod expr;
pub mod forms;
pub mod mu;
pub mod potential;
pub mod quadrature;

pub use error::Error;
pub use exec::Exec;
pub use expr::{parse, Expr, Var};
pub use forms::{Domain, OneForm, Point};

/// Default absolute tolerance for closedness and period tests.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default number of closedness samples.
pub const DEFAULT_SAMPLES: usize = 256;
/// Default relative tolerance for loop quadrature.
pub const DEFAULT_RTOL: f64 = 1e-10;
/// Default exclusion radius around punctures.
pub const DEFAULT_EXCLUSION_RADIUS: f64 = 0.1;
