//! Loop integrals, period vectors and the exactness classification.
//!
//! On a rectangle minus `k` points, the first de Rham cohomology is spanned
//! by the classes of the `k` small circles around the punctures. A closed
//! form is exact exactly when its integral around each of those circles
//! vanishes, so the vector of puncture periods stands in for its class.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::exec::Exec;
use crate::forms::{self, Closedness, Domain, OneForm, Point};
use crate::quadrature::{integrate_adaptive_scaled, Adaptive, Quadrature};
use crate::{Error, DEFAULT_RTOL, DEFAULT_SAMPLES, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    #[serde(rename = "ccw")]
    CounterClockwise,
    #[serde(rename = "cw")]
    Clockwise,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::CounterClockwise => 1.0,
            Orientation::Clockwise => -1.0,
        }
    }

    pub fn reversed(self) -> Orientation {
        match self {
            Orientation::CounterClockwise => Orientation::Clockwise,
            Orientation::Clockwise => Orientation::CounterClockwise,
        }
    }
}

/// Circle `center + radius * (cos(s t), sin(s t))`, `t` in `[0, 2 pi]`, with
/// `s = +1` for counterclockwise and `-1` for clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Loop {
    pub center: Point,
    pub radius: f64,
    pub orientation: Orientation,
}

impl Loop {
    pub fn new(center: Point, radius: f64, orientation: Orientation) -> Loop {
        Loop {
            center,
            radius,
            orientation,
        }
    }

    pub fn ccw(center: Point, radius: f64) -> Loop {
        Loop::new(center, radius, Orientation::CounterClockwise)
    }

    pub fn cw(center: Point, radius: f64) -> Loop {
        Loop::new(center, radius, Orientation::Clockwise)
    }

    /// The loop a domain uses for the period at `puncture`.
    pub fn around(puncture: Point, domain: &Domain) -> Loop {
        Loop::ccw(puncture, 2.0 * domain.exclusion_radius())
    }

    pub fn reversed(self) -> Loop {
        Loop {
            orientation: self.orientation.reversed(),
            ..self
        }
    }

    pub fn point(&self, t: f64) -> Point {
        let a = self.orientation.sign() * t;
        Point::new(
            self.center.x + self.radius * a.cos(),
            self.center.y + self.radius * a.sin(),
        )
    }

    pub fn velocity(&self, t: f64) -> (f64, f64) {
        let s = self.orientation.sign();
        let a = s * t;
        (-s * self.radius * a.sin(), s * self.radius * a.cos())
    }

    pub fn circumference(&self) -> f64 {
        TAU * self.radius
    }

    /// The image must lie inside the rectangle and outside every exclusion
    /// disk. Encircling a puncture is allowed.
    pub fn check_admissible(&self, domain: &Domain) -> Result<(), Error> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidLoop(format!("radius {} must be positive", self.radius)));
        }
        let [xmin, xmax, ymin, ymax] = domain.rect();
        let c = self.center;
        if c.x - self.radius <= xmin
            || c.x + self.radius >= xmax
            || c.y - self.radius <= ymin
            || c.y + self.radius >= ymax
        {
            return Err(Error::InvalidLoop(format!(
                "circle of radius {} around ({}, {}) leaves the rectangle",
                self.radius, c.x, c.y
            )));
        }
        let r = domain.exclusion_radius();
        for q in domain.punctures() {
            if (q.dist(c) - self.radius).abs() <= r {
                return Err(Error::InvalidLoop(format!(
                    "circle of radius {} around ({}, {}) enters the exclusion disk of ({}, {})",
                    self.radius, c.x, c.y, q.x, q.y
                )));
            }
        }
        Ok(())
    }
}

/// Quadrature of the counterclockwise circle; orientation is applied as a
/// sign so reversal negates the result exactly.
pub fn line_integral_detailed(
    w: &OneForm,
    gamma: &Loop,
    rtol: f64,
    exec: Exec,
) -> Result<Quadrature, Error> {
    let ccw = Loop {
        orientation: Orientation::CounterClockwise,
        ..*gamma
    };
    let mut q = integrate_adaptive_scaled(
        |t| forms::pullback_terms(w, &ccw, t),
        0.0,
        TAU,
        Adaptive::with_rtol(rtol),
        exec,
    )?;
    q.value *= gamma.orientation.sign();
    Ok(q)
}

/// `∮_γ w` by adaptive composite Gauss-Legendre quadrature.
pub fn line_integral(w: &OneForm, gamma: &Loop, rtol: f64) -> Result<f64, Error> {
    line_integral_detailed(w, gamma, rtol, Exec::default()).map(|q| q.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeriodEntry {
    pub puncture: Point,
    pub value: f64,
}

/// Periods of a closed form around each puncture, in puncture order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodVector {
    #[serde(rename = "periods")]
    pub entries: Vec<PeriodEntry>,
    pub rtol: f64,
}

impl PeriodVector {
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.value.abs()).fold(0.0, f64::max)
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }
}

/// Periods without the closedness gate.
pub(crate) fn periods_unchecked(
    w: &OneForm,
    u: &Domain,
    rtol: f64,
    exec: Exec,
) -> Result<PeriodVector, Error> {
    let values = exec.map(u.punctures(), |&p| {
        // panels run sequentially inside each puncture's integral
        line_integral_detailed(w, &Loop::around(p, u), rtol, Exec::Sequential)
    });
    let entries = u
        .punctures()
        .iter()
        .zip(values)
        .map(|(&puncture, q)| q.map(|q| PeriodEntry { puncture, value: q.value }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PeriodVector { entries, rtol })
}

/// Periods around every puncture of `u`. Refuses forms that fail the default
/// closedness test, since their loop integrals depend on the loop.
pub fn periods(w: &OneForm, u: &Domain, rtol: f64) -> Result<PeriodVector, Error> {
    periods_with(w, u, rtol, Exec::default())
}

pub fn periods_with(w: &OneForm, u: &Domain, rtol: f64, exec: Exec) -> Result<PeriodVector, Error> {
    let c = forms::is_closed_with(w, u, DEFAULT_SAMPLES, DEFAULT_TOL, exec)?;
    if !c.closed {
        return Err(Error::NotClosed {
            residual: c.max_residual,
        });
    }
    periods_unchecked(w, u, rtol, exec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Exact,
    ClosedNotExact,
    NotClosed,
}

/// Exactness classification with its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub kind: ClassKind,
    /// Max sampled `|N_x - M_y|`.
    pub residual: f64,
    /// Absent for forms that are not closed.
    pub periods: Option<PeriodVector>,
    pub max_abs_period: f64,
    pub tolerance: f64,
    /// Threshold for a vanishing period: `tolerance` times the loop length.
    pub period_tolerance: f64,
    pub samples: usize,
}

impl Classification {
    pub fn is_exact(&self) -> bool {
        self.kind == ClassKind::Exact
    }

    /// Consistency between the kind and the recorded diagnostics.
    pub fn check_invariants(&self) -> Result<(), String> {
        let periods_vanish = self.max_abs_period <= self.period_tolerance;
        let closed = self.residual <= self.tolerance;
        let ok = match self.kind {
            ClassKind::Exact => closed && periods_vanish && self.periods.is_some(),
            ClassKind::ClosedNotExact => closed && !periods_vanish && self.periods.is_some(),
            ClassKind::NotClosed => !closed,
        };
        if ok {
            Ok(())
        } else {
            Err(format!("inconsistent classification {self:?}"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub tol: f64,
    pub samples: usize,
    pub rtol: f64,
    pub exec: Exec,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tol: DEFAULT_TOL,
            samples: DEFAULT_SAMPLES,
            rtol: DEFAULT_RTOL,
            exec: Exec::default(),
        }
    }
}

/// Not closed if the closedness residual exceeds `tol`; otherwise closed but
/// not exact if some period exceeds the period threshold; otherwise exact.
pub fn classify(w: &OneForm, u: &Domain, tol: f64) -> Result<Classification, Error> {
    classify_with(
        w,
        u,
        &ClassifyOptions {
            tol,
            ..ClassifyOptions::default()
        },
    )
}

pub fn classify_with(
    w: &OneForm,
    u: &Domain,
    opts: &ClassifyOptions,
) -> Result<Classification, Error> {
    let Closedness {
        closed,
        max_residual,
        samples,
    } = forms::is_closed_with(w, u, opts.samples, opts.tol, opts.exec)?;
    let period_tolerance = opts.tol * TAU * 2.0 * u.exclusion_radius();
    let out = if !closed {
        Classification {
            kind: ClassKind::NotClosed,
            residual: max_residual,
            periods: None,
            max_abs_period: 0.0,
            tolerance: opts.tol,
            period_tolerance,
            samples,
        }
    } else {
        let periods = periods_unchecked(w, u, opts.rtol, opts.exec)?;
        let max_abs_period = periods.max_abs();
        let kind = if max_abs_period > period_tolerance {
            ClassKind::ClosedNotExact
        } else {
            ClassKind::Exact
        };
        Classification {
            kind,
            residual: max_residual,
            periods: Some(periods),
            max_abs_period,
            tolerance: opts.tol,
            period_tolerance,
            samples,
        }
    };
    debug_assert!(out.check_invariants().is_ok());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn angular() -> OneForm {
        OneForm::parse("-y/(x^2+y^2)", "x/(x^2+y^2)").unwrap()
    }

    fn radial() -> OneForm {
        OneForm::parse("x/(x^2+y^2)", "y/(x^2+y^2)").unwrap()
    }

    fn punctured_box() -> Domain {
        Domain::rectangle(-2.0, 2.0, -2.0, 2.0)
            .unwrap()
            .with_puncture(Point::new(0.0, 0.0))
            .unwrap()
    }

    #[test]
    fn unit_circle_integrals() {
        let unit = Loop::ccw(Point::new(0.0, 0.0), 1.0);
        let v = line_integral(&angular(), &unit, 1e-10).unwrap();
        assert!((v - TAU).abs() < 1e-12);
        assert!(line_integral(&radial(), &unit, 1e-10).unwrap().abs() < 1e-14);
        let back = line_integral(&angular(), &unit.reversed(), 1e-10).unwrap();
        assert_eq!(back, -v);
    }

    #[test]
    fn loop_parametrization_orientation() {
        let g = Loop::cw(Point::new(1.0, 2.0), 0.5);
        let p = g.point(std::f64::consts::FRAC_PI_2);
        assert!((p.x - 1.0).abs() < 1e-15 && (p.y - 1.5).abs() < 1e-15);
        let (vx, vy) = g.velocity(0.0);
        assert_eq!((vx, vy), (0.0, -0.5));
    }

    #[test]
    fn loop_admissibility() {
        let d = punctured_box();
        assert!(Loop::around(Point::new(0.0, 0.0), &d).check_admissible(&d).is_ok());
        assert!(Loop::ccw(Point::new(0.0, 0.0), 2.05).check_admissible(&d).is_err());
        assert!(Loop::ccw(Point::new(0.0, 0.0), 0.05).check_admissible(&d).is_err());
        assert!(Loop::ccw(Point::new(0.5, 0.0), 0.45).check_admissible(&d).is_err());
        assert!(Loop::ccw(Point::new(1.0, 1.0), 0.5).check_admissible(&d).is_ok());
    }

    #[test]
    fn period_vectors() {
        let d = punctured_box();
        let p = periods(&angular(), &d, 1e-10).unwrap();
        assert_eq!(p.entries.len(), 1);
        assert!((p.entries[0].value - TAU).abs() < 1e-10);
        let p = periods(&radial(), &d, 1e-10).unwrap();
        assert!(p.entries[0].value.abs() < 1e-12);
        let f = parse("x^2*y + x + sin(y)").unwrap();
        let plain = Domain::rectangle(-2.0, 2.0, -2.0, 2.0).unwrap();
        assert!(periods(&OneForm::exact(&f), &plain, 1e-10).unwrap().entries.is_empty());
        let not_closed = OneForm::parse("-y", "x").unwrap();
        assert!(matches!(periods(&not_closed, &d, 1e-10), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn periods_follow_puncture_order() {
        let d = Domain::new(
            -3.0,
            3.0,
            -2.0,
            2.0,
            vec![Point::new(1.0, 0.0), Point::new(-1.0, 0.5)],
            0.1,
        )
        .unwrap();
        // dtheta around (1, 0) minus twice dtheta around (-1, 0.5)
        let w = OneForm::parse(
            "-y/((x-1)^2+y^2) + 2*(y-0.5)/((x+1)^2+(y-0.5)^2)",
            "(x-1)/((x-1)^2+y^2) - 2*(x+1)/((x+1)^2+(y-0.5)^2)",
        )
        .unwrap();
        for exec in [Exec::Sequential, Exec::Parallel] {
            let p = periods_with(&w, &d, 1e-10, exec).unwrap();
            assert!((p.entries[0].value - TAU).abs() < 1e-9);
            assert!((p.entries[1].value + 2.0 * TAU).abs() < 1e-9);
            assert_eq!(p.entries[1].puncture, Point::new(-1.0, 0.5));
        }
    }

    #[test]
    fn classification_examples() {
        let plain = Domain::rectangle(-2.0, 2.0, -2.0, 2.0).unwrap();
        let ex1 = OneForm::parse("2*x*y+1", "x^2+cos(y)").unwrap();
        let c = classify(&ex1, &plain, 1e-10).unwrap();
        assert_eq!(c.kind, ClassKind::Exact);

        let c = classify(&angular(), &punctured_box(), 1e-10).unwrap();
        assert_eq!(c.kind, ClassKind::ClosedNotExact);
        assert!((c.max_abs_period - TAU).abs() < 1e-10);

        let c = classify(&OneForm::parse("-y", "x").unwrap(), &plain, 1e-10).unwrap();
        assert_eq!(c.kind, ClassKind::NotClosed);
        assert_eq!(c.residual, 2.0);
        for c in [c] {
            c.check_invariants().unwrap();
        }
    }

    #[test]
    fn classification_json_shape() {
        let c = classify(&angular(), &punctured_box(), 1e-10).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["kind"], "closed_not_exact");
        assert_eq!(v["periods"]["periods"][0]["puncture"], serde_json::json!([0.0, 0.0]));
        assert!(v["residual"].is_number());
    }
}
