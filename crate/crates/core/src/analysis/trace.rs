//! Integral curves of the kernel field `(N, -M)`.

use serde::Serialize;

use crate::exec::Exec;
use crate::forms::{Domain, OneForm, Point};
use crate::potential::Potential;
use crate::Error;

/// Below this field magnitude the direction is undefined.
const SINGULAR_FIELD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    LeftDomain,
    StepCap,
    Singular,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "F")]
    pub f: Option<f64>,
}

impl TracePoint {
    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveTrace {
    pub seed: Point,
    pub step: f64,
    pub termination: Termination,
    pub points: Vec<TracePoint>,
}

impl CurveTrace {
    /// Max `|F - F(seed)|` along the trace, if `F` was annotated.
    pub fn level_drift(&self) -> Option<f64> {
        let f0 = self.points.first()?.f?;
        self.points
            .iter()
            .map(|p| p.f.map(|f| (f - f0).abs()))
            .try_fold(0.0, |acc: f64, d| d.map(|d| acc.max(d)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    pub step: f64,
    pub max_steps: usize,
    pub exec: Exec,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            step: 1e-2,
            max_steps: 10_000,
            exec: Exec::default(),
        }
    }
}

/// A 3 x 3 grid at the quarter points of the rectangle, minus excluded
/// points.
pub fn default_seeds(u: &Domain) -> Vec<Point> {
    let [xmin, xmax, ymin, ymax] = u.rect();
    let fracs = [0.25, 0.5, 0.75];
    fracs
        .iter()
        .flat_map(|fy| {
            fracs
                .iter()
                .map(move |fx| Point::new(xmin + fx * (xmax - xmin), ymin + fy * (ymax - ymin)))
        })
        .filter(|p| u.is_admissible(*p))
        .collect()
}

/// Unit kernel direction, `None` when the field is singular or undefined.
fn direction(w: &OneForm, p: Point) -> Option<(f64, f64)> {
    let (m, n) = w.eval(p).ok()?;
    let norm = m.hypot(n);
    if !(norm >= SINGULAR_FIELD) {
        return None;
    }
    Some((n / norm, -m / norm))
}

fn rk4_step(w: &OneForm, p: Point, h: f64) -> Option<Point> {
    let shift = |p: Point, (dx, dy): (f64, f64), s: f64| Point::new(p.x + s * dx, p.y + s * dy);
    let k1 = direction(w, p)?;
    let k2 = direction(w, shift(p, k1, h / 2.0))?;
    let k3 = direction(w, shift(p, k2, h / 2.0))?;
    let k4 = direction(w, shift(p, k3, h))?;
    Some(Point::new(
        p.x + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        p.y + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    ))
}

fn trace_one(
    w: &OneForm,
    u: &Domain,
    seed: Point,
    opts: &TraceOptions,
    potential: Option<&Potential>,
) -> Result<CurveTrace, Error> {
    if !u.is_admissible(seed) {
        return Err(Error::OutsideDomain(seed));
    }
    w.eval(seed)?;
    let annotate = |t: f64, p: Point| TracePoint {
        t,
        x: p.x,
        y: p.y,
        f: potential.and_then(|f| f.value(p).ok()),
    };
    let mut points = vec![annotate(0.0, seed)];
    let mut p = seed;
    let mut termination = Termination::StepCap;
    for k in 1..=opts.max_steps {
        let Some(next) = rk4_step(w, p, opts.step) else {
            termination = Termination::Singular;
            break;
        };
        if !u.is_admissible(next) {
            termination = Termination::LeftDomain;
            break;
        }
        p = next;
        points.push(annotate(k as f64 * opts.step, p));
    }
    Ok(CurveTrace {
        seed,
        step: opts.step,
        termination,
        points,
    })
}

/// Traces one curve per seed with fixed-step RK4 on the unit-speed kernel
/// field. Seeds are traced concurrently under a parallel [`Exec`].
pub fn trace_curves(
    w: &OneForm,
    u: &Domain,
    seeds: &[Point],
    opts: &TraceOptions,
    potential: Option<&Potential>,
) -> Result<Vec<CurveTrace>, Error> {
    opts.exec
        .map(seeds, |s| trace_one(w, u, *s, opts, potential))
        .into_iter()
        .collect()
}
