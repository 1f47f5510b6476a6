//! Planar 1-forms `M dx + N dy` and the punctured rectangles they live on.

use serde::{Deserialize, Serialize};

use crate::cohomology::Loop;
use crate::exec::Exec;
use crate::expr::{self, EvalError, Expr, Var};
use crate::{Error, DEFAULT_EXCLUSION_RADIUS, DEFAULT_SAMPLES, DEFAULT_TOL};

/// A point of the plane. Serializes as `[x, y]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, s: f64) -> Point {
        Point::new(
            self.x + s * (other.x - self.x),
            self.y + s * (other.y - self.y),
        )
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point { x, y }
    }
}

#[derive(Serialize, Deserialize)]
struct DomainRepr {
    rect: [f64; 4],
    #[serde(default)]
    punctures: Vec<Point>,
    #[serde(default = "default_radius")]
    exclusion_radius: f64,
}

fn default_radius() -> f64 {
    DEFAULT_EXCLUSION_RADIUS
}

/// Rectangle minus finitely many punctures.
///
/// Sampling and quadrature stay at least `exclusion_radius` away from every
/// puncture. Punctures are at least four radii apart and two radii from the
/// boundary, so a circle of twice the radius around any puncture fits in the
/// domain and avoids the other exclusion disks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub struct Domain {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    punctures: Vec<Point>,
    exclusion_radius: f64,
}

impl TryFrom<DomainRepr> for Domain {
    type Error = Error;

    fn try_from(r: DomainRepr) -> Result<Self, Error> {
        let [xmin, xmax, ymin, ymax] = r.rect;
        Domain::new(xmin, xmax, ymin, ymax, r.punctures, r.exclusion_radius)
    }
}

impl From<Domain> for DomainRepr {
    fn from(d: Domain) -> Self {
        DomainRepr {
            rect: [d.xmin, d.xmax, d.ymin, d.ymax],
            punctures: d.punctures,
            exclusion_radius: d.exclusion_radius,
        }
    }
}

impl Domain {
    pub fn new(
        xmin: f64,
        xmax: f64,
        ymin: f64,
        ymax: f64,
        punctures: Vec<Point>,
        exclusion_radius: f64,
    ) -> Result<Domain, Error> {
        let bad = |msg: String| Err(Error::InvalidDomain(msg));
        if ![xmin, xmax, ymin, ymax, exclusion_radius]
            .iter()
            .all(|v| v.is_finite())
        {
            return bad("non-finite bounds or radius".into());
        }
        if !(xmin < xmax && ymin < ymax) {
            return bad(format!(
                "rectangle [{xmin}, {xmax}] x [{ymin}, {ymax}] is empty"
            ));
        }
        if exclusion_radius <= 0.0 {
            return bad(format!("exclusion radius {exclusion_radius} must be positive"));
        }
        for (i, p) in punctures.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return bad("non-finite puncture".into());
            }
            let margin = (p.x - xmin)
                .min(xmax - p.x)
                .min(p.y - ymin)
                .min(ymax - p.y);
            if margin < 2.0 * exclusion_radius {
                return bad(format!(
                    "puncture ({}, {}) is closer than two exclusion radii to the boundary",
                    p.x, p.y
                ));
            }
            for q in &punctures[..i] {
                if p.dist(*q) < 4.0 * exclusion_radius {
                    return bad(format!(
                        "punctures ({}, {}) and ({}, {}) are closer than four exclusion radii",
                        q.x, q.y, p.x, p.y
                    ));
                }
            }
        }
        Ok(Domain {
            xmin,
            xmax,
            ymin,
            ymax,
            punctures,
            exclusion_radius,
        })
    }

    /// Unpunctured rectangle with the default exclusion radius.
    pub fn rectangle(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Result<Domain, Error> {
        Domain::new(xmin, xmax, ymin, ymax, Vec::new(), DEFAULT_EXCLUSION_RADIUS)
    }

    pub fn with_puncture(mut self, p: Point) -> Result<Domain, Error> {
        self.punctures.push(p);
        Domain::new(
            self.xmin,
            self.xmax,
            self.ymin,
            self.ymax,
            self.punctures,
            self.exclusion_radius,
        )
    }

    pub fn with_exclusion_radius(self, r: f64) -> Result<Domain, Error> {
        Domain::new(self.xmin, self.xmax, self.ymin, self.ymax, self.punctures, r)
    }

    pub fn rect(&self) -> [f64; 4] {
        [self.xmin, self.xmax, self.ymin, self.ymax]
    }

    pub fn punctures(&self) -> &[Point] {
        &self.punctures
    }

    pub fn exclusion_radius(&self) -> f64 {
        self.exclusion_radius
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))
    }

    /// Inside the closed rectangle; potentials may be evaluated on its edges.
    pub fn in_rect(&self, p: Point) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    /// Membership in the open set: inside the rectangle and not a puncture.
    pub fn contains(&self, p: Point) -> bool {
        self.in_rect(p) && self.punctures.iter().all(|q| *q != p)
    }

    /// Inside the rectangle and outside every closed exclusion disk.
    pub fn is_admissible(&self, p: Point) -> bool {
        self.in_rect(p)
            && self
                .punctures
                .iter()
                .all(|q| q.dist(p) > self.exclusion_radius)
    }

    /// The first puncture whose exclusion disk contains `p`.
    pub fn blocking_puncture(&self, p: Point) -> Option<Point> {
        self.punctures
            .iter()
            .copied()
            .find(|q| q.dist(p) <= self.exclusion_radius)
    }

    /// Deterministic quasi-random admissible points (Halton, bases 2 and 3).
    pub fn sampler(&self) -> Sampler<'_> {
        Sampler {
            domain: self,
            index: 0,
        }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Iterator over admissible Halton points of a domain.
#[derive(Clone, Debug)]
pub struct Sampler<'a> {
    domain: &'a Domain,
    index: u64,
}

impl Sampler<'_> {
    /// Next Halton point of the rectangle, admissible or not.
    fn next_raw(&mut self) -> Point {
        self.index += 1;
        let d = self.domain;
        Point::new(
            d.xmin + radical_inverse(self.index, 2) * d.width(),
            d.ymin + radical_inverse(self.index, 3) * d.height(),
        )
    }
}

impl Iterator for Sampler<'_> {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        // punctures cover a bounded fraction of the area, so this terminates
        loop {
            let p = self.next_raw();
            if self.domain.is_admissible(p) {
                return Some(p);
            }
        }
    }
}

/// Evaluates `f` on up to `n` admissible sample points, skipping points where
/// it fails and drawing replacements from at most `10 * n` candidates.
pub(crate) fn sample_valid<F>(domain: &Domain, n: usize, exec: Exec, f: F) -> Vec<(Point, f64)>
where
    F: Fn(Point) -> Result<f64, EvalError> + Sync + Send,
{
    let mut out = Vec::with_capacity(n);
    let mut sampler = domain.sampler();
    let mut drawn = 0;
    while out.len() < n && drawn < 10 * n {
        let batch: Vec<Point> = sampler.by_ref().take(n - out.len()).collect();
        drawn += batch.len();
        let values = exec.map(&batch, |&p| f(p));
        for (p, v) in batch.into_iter().zip(values) {
            if let Ok(v) = v {
                out.push((p, v));
            }
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
struct OneFormRepr {
    #[serde(rename = "M")]
    m: String,
    #[serde(rename = "N")]
    n: String,
}

/// The 1-form `m dx + n dy`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OneFormRepr", into = "OneFormRepr")]
pub struct OneForm {
    pub m: Expr,
    pub n: Expr,
}

impl TryFrom<OneFormRepr> for OneForm {
    type Error = Error;

    fn try_from(r: OneFormRepr) -> Result<Self, Error> {
        OneForm::parse(&r.m, &r.n)
    }
}

impl From<OneForm> for OneFormRepr {
    fn from(w: OneForm) -> Self {
        OneFormRepr {
            m: w.m.to_string(),
            n: w.n.to_string(),
        }
    }
}

impl OneForm {
    pub fn new(m: Expr, n: Expr) -> OneForm {
        OneForm { m, n }
    }

    pub fn parse(m: &str, n: &str) -> Result<OneForm, Error> {
        Ok(OneForm {
            m: expr::parse(m)?,
            n: expr::parse(n)?,
        })
    }

    /// `dF = F_x dx + F_y dy`.
    pub fn exact(f: &Expr) -> OneForm {
        OneForm {
            m: f.diff(Var::X),
            n: f.diff(Var::Y),
        }
    }

    pub fn zero() -> OneForm {
        OneForm::new(Expr::zero(), Expr::zero())
    }

    /// `(M(p), N(p))`.
    pub fn eval(&self, p: Point) -> Result<(f64, f64), Error> {
        let wrap = |source| Error::Eval { at: p, source };
        Ok((self.m.eval(p).map_err(wrap)?, self.n.eval(p).map_err(wrap)?))
    }

    /// Value on a tangent vector: `M(p) vx + N(p) vy`.
    pub fn apply(&self, p: Point, vx: f64, vy: f64) -> Result<f64, EvalError> {
        Ok(self.m.eval(p)? * vx + self.n.eval(p)? * vy)
    }

    /// `(M vx + N vy, |M vx| + |N vy|)`.
    pub fn apply_terms(&self, p: Point, vx: f64, vy: f64) -> Result<(f64, f64), EvalError> {
        let (a, b) = (self.m.eval(p)? * vx, self.n.eval(p)? * vy);
        Ok((a + b, a.abs() + b.abs()))
    }

    /// `a*self + b*other`, simplified.
    pub fn combine(&self, a: f64, other: &OneForm, b: f64) -> OneForm {
        let lin = |u: &Expr, v: &Expr| {
            Expr::constant(a)
                .mul(u.clone())
                .add(Expr::constant(b).mul(v.clone()))
                .simplify()
        };
        OneForm::new(lin(&self.m, &other.m), lin(&self.n, &other.n))
    }
}

/// Coefficient of `dx ^ dy` in `dw`: `N_x - M_y`, simplified.
pub fn d_coefficient(w: &OneForm) -> Expr {
    w.n.diff(Var::X).sub(w.m.diff(Var::Y)).simplify()
}

/// Outcome of a sampled closedness test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Closedness {
    pub closed: bool,
    pub max_residual: f64,
    /// Number of points sampled; 0 when `dw` simplified to zero symbolically.
    pub samples: usize,
}

/// Samples `|N_x - M_y|` at `n` admissible points and compares the maximum
/// with `tol`. A `dw` that simplifies to 0 is accepted without sampling.
pub fn is_closed(w: &OneForm, u: &Domain, n: usize, tol: f64) -> Result<Closedness, Error> {
    is_closed_with(w, u, n, tol, Exec::default())
}

pub fn is_closed_with(
    w: &OneForm,
    u: &Domain,
    n: usize,
    tol: f64,
    exec: Exec,
) -> Result<Closedness, Error> {
    let d = d_coefficient(w);
    if d.is_zero() {
        return Ok(Closedness {
            closed: true,
            max_residual: 0.0,
            samples: 0,
        });
    }
    max_abs_on_samples(&d, u, n, exec).map(|(max_residual, samples)| Closedness {
        closed: max_residual <= tol,
        max_residual,
        samples,
    })
}

/// Closedness with the default sample count and tolerance.
pub fn is_closed_default(w: &OneForm, u: &Domain) -> Result<Closedness, Error> {
    is_closed(w, u, DEFAULT_SAMPLES, DEFAULT_TOL)
}

pub(crate) fn max_abs_on_samples(
    e: &Expr,
    u: &Domain,
    n: usize,
    exec: Exec,
) -> Result<(f64, usize), Error> {
    let values = sample_valid(u, n.max(1), exec, |p| e.eval(p));
    if values.is_empty() {
        return Err(Error::NoValidSamples {
            needed: 1,
            found: 0,
        });
    }
    let max = values.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    Ok((max, values.len()))
}

/// `mu * w`, components simplified.
pub fn scale(w: &OneForm, mu: &Expr) -> OneForm {
    OneForm::new(
        mu.clone().mul(w.m.clone()).simplify(),
        mu.clone().mul(w.n.clone()).simplify(),
    )
}

/// `M(g(t)) g_x'(t) + N(g(t)) g_y'(t)`.
pub fn pullback_integrand(w: &OneForm, gamma: &Loop, t: f64) -> Result<f64, Error> {
    let p = gamma.point(t);
    let (vx, vy) = gamma.velocity(t);
    w.apply(p, vx, vy).map_err(|source| Error::Eval { at: p, source })
}

/// The pullback together with `|M g_x'| + |N g_y'|`, its scale before
/// cancellation.
pub fn pullback_terms(w: &OneForm, gamma: &Loop, t: f64) -> Result<(f64, f64), Error> {
    let p = gamma.point(t);
    let (vx, vy) = gamma.velocity(t);
    w.apply_terms(p, vx, vy)
        .map_err(|source| Error::Eval { at: p, source })
}
