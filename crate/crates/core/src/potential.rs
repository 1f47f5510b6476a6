//! Potentials `F` with `dF = w`.
//!
//! The symbolic route integrates `M` in `x`, matches the `y` derivative
//! against `N` and integrates the remainder in `y`. The numeric route
//! integrates `w` along axis-aligned paths from a base point, detouring
//! around punctures on circular arcs.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Mutex;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::cohomology::{self, ClassKind, Loop};
use crate::exec::Exec;
use crate::expr::{constant_shift, integrate_symbolic, ConstantShift, Expr, Var};
use crate::forms::{Domain, OneForm, Point};
use crate::quadrature::{integrate_adaptive_scaled, Adaptive};
use crate::{Error, DEFAULT_RTOL, DEFAULT_SAMPLES, DEFAULT_TOL};

/// Central-difference step for verifying numeric potentials.
pub const FD_STEP: f64 = 1e-5;
/// Default tolerance for [`uniqueness_check`].
pub const UNIQUENESS_TOL: f64 = 1e-8;

const SYMBOLIC_SAMPLES: usize = 64;

/// One piece of an integration path, parametrized over `s in [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    Segment { from: Point, to: Point },
    Arc { center: Point, radius: f64, start: f64, sweep: f64 },
}

impl Piece {
    pub fn point(&self, s: f64) -> Point {
        match *self {
            Piece::Segment { from, to } => from.lerp(to, s),
            Piece::Arc { center, radius, start, sweep } => {
                let t = start + s * sweep;
                Point::new(center.x + radius * t.cos(), center.y + radius * t.sin())
            }
        }
    }

    pub fn velocity(&self, s: f64) -> (f64, f64) {
        match *self {
            Piece::Segment { from, to } => (to.x - from.x, to.y - from.y),
            Piece::Arc { radius, start, sweep, .. } => {
                let t = start + s * sweep;
                (-radius * sweep * t.sin(), radius * sweep * t.cos())
            }
        }
    }

    pub fn end(&self) -> Point {
        self.point(1.0)
    }

    fn is_trivial(&self) -> bool {
        match *self {
            Piece::Segment { from, to } => from == to,
            Piece::Arc { sweep, .. } => sweep == 0.0,
        }
    }
}

/// Which leg of the two-segment path comes first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    HorizontalFirst,
    VerticalFirst,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub pieces: Vec<Piece>,
}

impl Path {
    /// Two-segment path `from -> corner -> to`, with arcs around punctures
    /// that come too close.
    pub fn two_segment(u: &Domain, from: Point, to: Point, route: Route) -> Result<Path, Error> {
        for p in [from, to] {
            if !u.in_rect(p) {
                return Err(Error::OutsideDomain(p));
            }
            if let Some(q) = u.blocking_puncture(p) {
                return Err(Error::NoAdmissiblePath { target: p, puncture: q });
            }
        }
        let corner = match route {
            Route::HorizontalFirst => Point::new(to.x, from.y),
            Route::VerticalFirst => Point::new(from.x, to.y),
        };
        if let Some(q) = u.blocking_puncture(corner) {
            return Err(Error::NoAdmissiblePath { target: to, puncture: q });
        }
        let mut pieces = Vec::new();
        detoured_segment(u, from, corner, &mut pieces);
        detoured_segment(u, corner, to, &mut pieces);
        pieces.retain(|p| !p.is_trivial());
        Ok(Path { pieces })
    }

    pub fn integrate(&self, w: &OneForm, rtol: f64) -> Result<f64, Error> {
        let mut total = 0.0;
        for piece in &self.pieces {
            total += integrate_piece(w, piece, rtol)?;
        }
        Ok(total)
    }
}

/// Appends the segment `a -> b`, replacing each chord through a detour
/// circle with the shorter arc of that circle. The circle has radius
/// `2r`, shrunk when an endpoint lies closer so the endpoint stays outside.
fn detoured_segment(u: &Domain, a: Point, b: Point, out: &mut Vec<Piece>) {
    let r = u.exclusion_radius();
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return;
    }
    let mut crossings = Vec::new();
    for &q in u.punctures() {
        let radius = (2.0 * r).min(0.5 * (r + a.dist(q).min(b.dist(q))));
        // solve |a + s (b - a) - q| = radius
        let (fx, fy) = (a.x - q.x, a.y - q.y);
        let half_b = fx * dx + fy * dy;
        let c = fx * fx + fy * fy - radius * radius;
        let disc = half_b * half_b - len2 * c;
        if disc <= 0.0 {
            continue;
        }
        let root = disc.sqrt();
        let (s0, s1) = ((-half_b - root) / len2, (-half_b + root) / len2);
        if s0 > 0.0 && s1 < 1.0 {
            crossings.push((s0, s1, q, radius));
        }
    }
    crossings.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut cursor = a;
    for (s0, s1, q, radius) in crossings {
        let entry = a.lerp(b, s0);
        let exit = a.lerp(b, s1);
        out.push(Piece::Segment { from: cursor, to: entry });
        let start = (entry.y - q.y).atan2(entry.x - q.x);
        let end = (exit.y - q.y).atan2(exit.x - q.x);
        let mut sweep = end - start;
        while sweep > PI {
            sweep -= 2.0 * PI;
        }
        while sweep <= -PI {
            sweep += 2.0 * PI;
        }
        if (sweep.abs() - PI).abs() < 1e-12 {
            sweep = PI;
        }
        out.push(Piece::Arc {
            center: q,
            radius,
            start,
            sweep,
        });
        cursor = exit;
    }
    out.push(Piece::Segment { from: cursor, to: b });
}

fn integrate_piece(w: &OneForm, piece: &Piece, rtol: f64) -> Result<f64, Error> {
    let q = integrate_adaptive_scaled(
        |s| {
            let p = piece.point(s);
            let (vx, vy) = piece.velocity(s);
            w.apply_terms(p, vx, vy)
                .map_err(|source| Error::Eval { at: p, source })
        },
        0.0,
        1.0,
        Adaptive::with_rtol(rtol),
        Exec::Sequential,
    )?;
    Ok(q.value)
}

/// Path-integral potential, `F(base) = 0`.
pub struct NumericPotential {
    form: OneForm,
    domain: Domain,
    base: Point,
    rtol: f64,
    cache: Option<Mutex<HashMap<(u64, u64), f64>>>,
}

impl NumericPotential {
    /// Builds the evaluator without checking exactness. Values then depend
    /// on the path; this is what the transport diagnostic needs.
    pub fn along_paths(w: &OneForm, u: &Domain, base: Point, rtol: f64) -> Result<Self, Error> {
        if !u.in_rect(base) {
            return Err(Error::OutsideDomain(base));
        }
        if let Some(q) = u.blocking_puncture(base) {
            return Err(Error::NoAdmissiblePath { target: base, puncture: q });
        }
        Ok(NumericPotential {
            form: w.clone(),
            domain: u.clone(),
            base,
            rtol,
            cache: Some(Mutex::new(HashMap::new())),
        })
    }

    /// Disables the value cache.
    pub fn uncached(mut self) -> Self {
        self.cache = None;
        self
    }

    pub fn base(&self) -> Point {
        self.base
    }

    pub fn form(&self) -> &OneForm {
        &self.form
    }

    /// `F(p)` along the horizontal-first path, or the vertical-first path if
    /// the first corner is blocked.
    pub fn value(&self, p: Point) -> Result<f64, Error> {
        let key = (p.x.to_bits(), p.y.to_bits());
        if let Some(cache) = &self.cache {
            if let Some(v) = cache.lock().expect("cache poisoned").get(&key) {
                return Ok(*v);
            }
        }
        let v = match self.value_via(p, Route::HorizontalFirst) {
            Err(Error::NoAdmissiblePath { .. }) => self.value_via(p, Route::VerticalFirst)?,
            other => other?,
        };
        if let Some(cache) = &self.cache {
            cache.lock().expect("cache poisoned").insert(key, v);
        }
        Ok(v)
    }

    /// `F(p)` along an explicit route, uncached.
    pub fn value_via(&self, p: Point, route: Route) -> Result<f64, Error> {
        if p == self.base {
            return Ok(0.0);
        }
        Path::two_segment(&self.domain, self.base, p, route)?.integrate(&self.form, self.rtol)
    }

    /// Values of `F` at the start and end of a loop, continued along it.
    pub fn transport(&self, gamma: &Loop) -> Result<(f64, f64), Error> {
        let start = self.value(gamma.point(0.0))?;
        let change = cohomology::line_integral(&self.form, gamma, self.rtol)?;
        Ok((start, start + change))
    }
}

impl Clone for NumericPotential {
    fn clone(&self) -> Self {
        NumericPotential {
            form: self.form.clone(),
            domain: self.domain.clone(),
            base: self.base,
            rtol: self.rtol,
            cache: self.cache.as_ref().map(|_| Mutex::new(HashMap::new())),
        }
    }
}

impl fmt::Debug for NumericPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumericPotential")
            .field("form", &self.form)
            .field("base", &self.base)
            .field("rtol", &self.rtol)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum Kind {
    Symbolic(Expr),
    Numeric(NumericPotential),
}

#[derive(Clone, Debug)]
pub struct Potential {
    pub kind: Kind,
    /// Max derivative mismatch from [`verify_potential`]; NaN until verified.
    pub residual: f64,
}

impl Potential {
    pub fn symbolic(f: Expr) -> Potential {
        Potential {
            kind: Kind::Symbolic(f),
            residual: f64::NAN,
        }
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.kind {
            Kind::Symbolic(f) => Some(f),
            Kind::Numeric(_) => None,
        }
    }

    pub fn value(&self, p: Point) -> Result<f64, Error> {
        match &self.kind {
            Kind::Symbolic(f) => f.eval(p).map_err(|source| Error::Eval { at: p, source }),
            Kind::Numeric(n) => n.value(p),
        }
    }

    pub fn normalization(&self) -> &'static str {
        match self.kind {
            Kind::Symbolic(_) => "integration constant dropped",
            Kind::Numeric(_) => "F(base)=0",
        }
    }

    /// Records the residual of [`verify_potential`].
    pub fn verified(mut self, w: &OneForm, u: &Domain, n: usize) -> Result<Potential, Error> {
        self.residual = verify_potential(&self, w, u, n)?;
        Ok(self)
    }
}

impl Serialize for Potential {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(4))?;
        match &self.kind {
            Kind::Symbolic(f) => {
                map.serialize_entry("kind", "symbolic")?;
                map.serialize_entry("F", &f.to_string())?;
            }
            Kind::Numeric(n) => {
                map.serialize_entry("kind", "numeric")?;
                map.serialize_entry("base", &n.base)?;
            }
        }
        map.serialize_entry("residual", &self.residual)?;
        map.serialize_entry("normalization", self.normalization())?;
        map.end()
    }
}

/// Integrate-and-match, with the `x`-independence of the remainder checked
/// on a default box around the origin.
pub fn potential_symbolic(w: &OneForm) -> Option<Potential> {
    let region = Domain::rectangle(-2.0, 2.0, -2.0, 2.0).expect("valid box");
    potential_symbolic_on(w, &region)
}

/// Integrate-and-match with the `x`-independence check sampled on `u`.
pub fn potential_symbolic_on(w: &OneForm, u: &Domain) -> Option<Potential> {
    let p = integrate_symbolic(&w.m, Var::X)?;
    let r = w.n.clone().sub(p.diff(Var::Y)).simplify();
    if r.depends_on(Var::X) && !x_independent(&r, u) {
        return None;
    }
    let q = integrate_symbolic(&r, Var::Y)?;
    Some(Potential::symbolic(p.add(q).simplify()))
}

fn x_independent(r: &Expr, u: &Domain) -> bool {
    let pts: Vec<Point> = u.sampler().take(2 * SYMBOLIC_SAMPLES).collect();
    let (firsts, seconds) = pts.split_at(SYMBOLIC_SAMPLES);
    let mut compared = 0;
    for (p, q) in firsts.iter().zip(seconds) {
        let moved = Point::new(q.x, p.y);
        let (Ok(a), Ok(b)) = (r.eval(*p), r.eval(moved)) else {
            continue;
        };
        if (a - b).abs() > 1e-9 * (1.0 + a.abs() + b.abs()) {
            return false;
        }
        compared += 1;
    }
    compared >= 2
}

/// Numeric potential from `base`; refuses forms that do not classify Exact.
pub fn potential_numeric(w: &OneForm, u: &Domain, base: Point) -> Result<Potential, Error> {
    let c = cohomology::classify(w, u, DEFAULT_TOL)?;
    match c.kind {
        ClassKind::Exact => {}
        ClassKind::NotClosed => {
            return Err(Error::NotClosed {
                residual: c.residual,
            })
        }
        ClassKind::ClosedNotExact => {
            return Err(Error::NotExact(format!(
                "max |period| {:e} exceeds {:e}",
                c.max_abs_period, c.period_tolerance
            )))
        }
    }
    Ok(Potential {
        kind: Kind::Numeric(NumericPotential::along_paths(w, u, base, DEFAULT_RTOL)?),
        residual: f64::NAN,
    })
}

/// Max over samples of `|F_x - M|` and `|F_y - N|`. Symbolic potentials
/// are differentiated exactly; numeric ones by central differences.
pub fn verify_potential(f: &Potential, w: &OneForm, u: &Domain, n: usize) -> Result<f64, Error> {
    verify_potential_with(f, w, u, n, Exec::default())
}

pub fn verify_potential_with(
    f: &Potential,
    w: &OneForm,
    u: &Domain,
    n: usize,
    exec: Exec,
) -> Result<f64, Error> {
    let derivatives = match &f.kind {
        Kind::Symbolic(e) => Some((e.diff(Var::X), e.diff(Var::Y))),
        Kind::Numeric(_) => None,
    };
    let mismatch = |p: Point| -> Option<f64> {
        let (m, nn) = (w.m.eval(p).ok()?, w.n.eval(p).ok()?);
        let (fx, fy) = match (&f.kind, &derivatives) {
            (_, Some((dx, dy))) => (dx.eval(p).ok()?, dy.eval(p).ok()?),
            (Kind::Numeric(num), None) => {
                let h = FD_STEP;
                let at = |x: f64, y: f64| num.value(Point::new(x, y)).ok();
                (
                    (at(p.x + h, p.y)? - at(p.x - h, p.y)?) / (2.0 * h),
                    (at(p.x, p.y + h)? - at(p.x, p.y - h)?) / (2.0 * h),
                )
            }
            (Kind::Symbolic(_), None) => unreachable!(),
        };
        Some((fx - m).abs().max((fy - nn).abs()))
    };
    let pts: Vec<Point> = u.sampler().take(10 * n).collect();
    let values: Vec<f64> = exec
        .map(&pts, |p| mismatch(*p))
        .into_iter()
        .flatten()
        .take(n)
        .collect();
    if values.is_empty() {
        return Err(Error::NoValidSamples { needed: n.max(1), found: 0 });
    }
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// Numeric potentials from two bases should differ by a constant.
pub fn uniqueness_check(
    w: &OneForm,
    u: &Domain,
    base1: Point,
    base2: Point,
    n: usize,
) -> Result<bool, Error> {
    uniqueness_check_with(w, u, base1, base2, n, UNIQUENESS_TOL).map(|s| s.equal)
}

pub fn uniqueness_check_with(
    w: &OneForm,
    u: &Domain,
    base1: Point,
    base2: Point,
    n: usize,
    tol: f64,
) -> Result<ConstantShift, Error> {
    let f1 = potential_numeric(w, u, base1)?;
    let f2 = NumericPotential::along_paths(w, u, base2, DEFAULT_RTOL)?;
    let Kind::Numeric(f1) = f1.kind else {
        unreachable!("potential_numeric builds numeric potentials")
    };
    let pts: Vec<Point> = u.sampler().take(n).collect();
    let diffs: Vec<f64> = Exec::default()
        .map(&pts, |p| Ok::<_, Error>(f1.value(*p)? - f2.value(*p)?))
        .into_iter()
        .collect::<Result<_, _>>()?;
    constant_shift(&diffs, tol)
}

/// Symbolic first, numeric fallback from `base`. The symbolic result is
/// kept only when its residual is within `tol`.
pub fn construct(w: &OneForm, u: &Domain, base: Point, tol: f64) -> Result<Potential, Error> {
    if let Some(p) = potential_symbolic_on(w, u) {
        let p = p.verified(w, u, DEFAULT_SAMPLES)?;
        if p.residual <= tol {
            return Ok(p);
        }
    }
    potential_numeric(w, u, base)?.verified(w, u, DEFAULT_SAMPLES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equal_up_to_constant, parse};

    fn ex1() -> OneForm {
        OneForm::parse("2*x*y + 1", "x^2 + cos(y)").unwrap()
    }

    fn ex2() -> OneForm {
        OneForm::parse("-y/(x^2+y^2)", "x/(x^2+y^2)").unwrap()
    }

    fn ex4() -> OneForm {
        OneForm::parse("x/(x^2+y^2)", "y/(x^2+y^2)").unwrap()
    }

    fn square() -> Domain {
        Domain::rectangle(-2.0, 2.0, -2.0, 2.0).unwrap()
    }

    fn punctured() -> Domain {
        square().with_puncture(Point::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn symbolic_example_one() {
        let f = potential_symbolic(&ex1()).unwrap();
        assert_eq!(f.expr().unwrap().to_string(), "x^2*y + x + sin(y)");
        assert!(verify_potential(&f, &ex1(), &square(), 256).unwrap() <= 1e-10);
    }

    #[test]
    fn symbolic_example_four_and_corrected_three() {
        let f = potential_symbolic_on(&ex4(), &punctured()).unwrap();
        let want = parse("0.5*log(x^2+y^2)").unwrap();
        assert!(equal_up_to_constant(f.expr().unwrap(), &want, &punctured(), 100, 1e-12)
            .unwrap()
            .equal);
        let f = potential_symbolic(&OneForm::parse("y", "x").unwrap()).unwrap();
        assert_eq!(f.expr().unwrap().to_string(), "x*y");
    }

    #[test]
    fn symbolic_declines_when_rules_run_out() {
        assert!(potential_symbolic(&OneForm::exact(&parse("exp(x^2)").unwrap())).is_none());
    }

    #[test]
    fn wrong_potential_fails_verification() {
        let wrong = Potential::symbolic(parse("x^2*y").unwrap());
        assert!(verify_potential(&wrong, &ex1(), &square(), 256).unwrap() > 0.5);
    }

    #[test]
    fn numeric_example_four() {
        let f = potential_numeric(&ex4(), &punctured(), Point::new(1.0, 0.0)).unwrap();
        assert_eq!(f.value(Point::new(1.0, 0.0)).unwrap(), 0.0);
        let v = f.value(Point::new(2.0, 0.0)).unwrap();
        assert!((v - 0.5 * 4f64.ln()).abs() < 1e-12);
        // vertical-first and detoured path through the puncture's shadow
        let v = f.value(Point::new(-1.5, 0.05)).unwrap();
        let want = 0.5 * (1.5f64 * 1.5 + 0.05 * 0.05).ln();
        assert!((v - want).abs() < 1e-10, "{v} vs {want}");
        let r = verify_potential(&f, &ex4(), &punctured(), 64).unwrap();
        assert!(r <= 1e-6, "{r}");
    }

    #[test]
    fn numeric_example_one() {
        let f = potential_numeric(&ex1(), &square(), Point::new(0.0, 0.0)).unwrap();
        let v = f.value(Point::new(1.0, 1.0)).unwrap();
        assert!((v - (2.0 + 1f64.sin())).abs() < 1e-12);
    }

    #[test]
    fn numeric_refuses_non_exact() {
        let e = potential_numeric(&ex2(), &punctured(), Point::new(1.0, 0.0)).unwrap_err();
        assert!(matches!(e, Error::NotExact(_)));
        let e = potential_numeric(&OneForm::parse("y", "-x").unwrap(), &square(), Point::new(1.0, 0.0));
        assert!(matches!(e, Err(Error::NotClosed { .. })));
    }

    #[test]
    fn path_independence_on_exact_forms() {
        let f = NumericPotential::along_paths(&ex4(), &punctured(), Point::new(1.0, 0.5), 1e-12).unwrap();
        for target in [Point::new(-1.0, -0.5), Point::new(-0.05, -1.7), Point::new(1.8, -1.9)] {
            let a = f.value_via(target, Route::HorizontalFirst).unwrap();
            let b = f.value_via(target, Route::VerticalFirst).unwrap();
            assert!((a - b).abs() < 1e-8, "{target:?}: {a} vs {b}");
        }
    }

    #[test]
    fn detour_arcs_stay_admissible() {
        let u = punctured();
        let path = Path::two_segment(&u, Point::new(-1.0, 0.0), Point::new(1.0, 0.15), Route::HorizontalFirst)
            .unwrap();
        assert!(path.pieces.iter().any(|p| matches!(p, Piece::Arc { .. })));
        let mut prev = Point::new(-1.0, 0.0);
        for piece in &path.pieces {
            assert!(piece.point(0.0).dist(prev) < 1e-12);
            for k in 0..=50 {
                assert!(u.is_admissible(piece.point(k as f64 / 50.0)));
            }
            prev = piece.end();
        }
        assert!(prev.dist(Point::new(1.0, 0.15)) < 1e-12);
    }

    #[test]
    fn blocked_targets_are_reported() {
        let f = potential_numeric(&ex4(), &punctured(), Point::new(1.0, 0.0)).unwrap();
        let e = f.value(Point::new(0.05, 0.0)).unwrap_err();
        assert!(matches!(e, Error::NoAdmissiblePath { .. }));
        let e = f.value(Point::new(3.0, 0.0)).unwrap_err();
        assert!(matches!(e, Error::OutsideDomain(_)));
    }

    #[test]
    fn transport_around_origin_picks_up_the_period() {
        let f = NumericPotential::along_paths(&ex2(), &punctured(), Point::new(1.0, 0.0), 1e-12).unwrap();
        let (start, end) = f.transport(&Loop::around(Point::new(0.0, 0.0), &punctured())).unwrap();
        assert!((end - start - 2.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn uniqueness() {
        assert!(uniqueness_check(&ex4(), &punctured(), Point::new(1.0, 0.0), Point::new(0.0, 1.0), 50).unwrap());
        assert!(uniqueness_check(&ex1(), &square(), Point::new(0.0, 0.0), Point::new(-1.0, 1.5), 50).unwrap());
        assert!(uniqueness_check(&ex2(), &punctured(), Point::new(1.0, 0.0), Point::new(0.0, 1.0), 50).is_err());
    }

    #[test]
    fn cache_can_be_bypassed() {
        let f = NumericPotential::along_paths(&ex1(), &square(), Point::new(0.0, 0.0), 1e-12).unwrap();
        let g = f.clone().uncached();
        let p = Point::new(0.7, -1.2);
        assert_eq!(f.value(p).unwrap(), g.value(p).unwrap());
        assert_eq!(f.value(p).unwrap(), f.value(p).unwrap());
    }

    #[test]
    fn json_shape() {
        let f = potential_symbolic(&ex1()).unwrap().verified(&ex1(), &square(), 64).unwrap();
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["kind"], "symbolic");
        assert_eq!(v["F"], "x^2*y + x + sin(y)");
        let f = potential_numeric(&ex4(), &punctured(), Point::new(1.0, 0.0)).unwrap();
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["base"], serde_json::json!([1.0, 0.0]));
        assert_eq!(v["normalization"], "F(base)=0");
    }
}
