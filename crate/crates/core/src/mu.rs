//! Integrating factors: a ladder of ansatz families, each verified by
//! sampling.
//!
//! For `w = M dx + N dy`, `mu w` is closed iff
//! `mu (M_y - N_x) + mu_y M - mu_x N = 0`. The ladder tries, in order:
//!
//! 1. `mu(x)`: if `h = (M_y - N_x) / N` does not depend on `y`, `mu = exp ∫ h dx`.
//! 2. `mu(y)`: if `g = (N_x - M_y) / M` does not depend on `x`, `mu = exp ∫ g dy`.
//! 3. `mu = x^a y^b`: `a N/x - b M/y = M_y - N_x`, linear in `(a, b)`.
//! 4. `mu = (x^2 + y^2)^k`: `k (2yM - 2xN)/(x^2 + y^2) = N_x - M_y`.
//!
//! Families 3 and 4 are fitted by least squares over sample points. Every
//! candidate must make `mu w` closed on the domain, must not vanish at the
//! samples, and must not be singular anywhere in the domain.

use serde::{Serialize, Serializer};

use crate::exec::Exec;
use crate::expr::{integrate_symbolic, Expr, Func, Var};
use crate::forms::{self, Domain, OneForm, Point};
use crate::DEFAULT_SAMPLES;

/// Max closedness residual accepted for `mu w`.
pub const VERIFY_TOL: f64 = 1e-8;
/// `|mu|` must exceed this at every sample.
pub const NONVANISHING_TOL: f64 = 1e-8;
/// Acceptance threshold for the least-squares fits (relative max residual).
pub const FIT_TOL: f64 = 1e-8;
/// Fitted exponents this close to an integer are rounded to it.
pub const SNAP_WINDOW: f64 = 1e-6;

const FIT_SAMPLES: usize = 64;
const MIN_FIT_ROWS: usize = 8;
const GUARD_GRID: usize = 41;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    XOnly,
    YOnly,
    PowerLaw,
    Radial,
}

impl Family {
    pub const LADDER: [Family; 4] = [Family::XOnly, Family::YOnly, Family::PowerLaw, Family::Radial];

    pub fn name(self) -> &'static str {
        match self {
            Family::XOnly => "x_only",
            Family::YOnly => "y_only",
            Family::PowerLaw => "power_law",
            Family::Radial => "radial",
        }
    }
}

fn as_text<S: Serializer>(e: &Expr, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(e)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MuCandidate {
    pub family: Family,
    #[serde(serialize_with = "as_text")]
    pub mu: Expr,
    pub verified: bool,
    /// Max closedness residual of `mu w`.
    pub residual: f64,
    #[serde(skip)]
    pub nonvanishing_checked: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// The family's structural test failed (e.g. `h` depends on `y`).
    NotApplicable,
    /// The antiderivative needed for `mu` is outside the rule set.
    NoRule,
    /// Too few usable samples (e.g. `N` vanishes or is undefined).
    SamplingFailed,
    /// The least-squares system does not determine a usable solution.
    RankDeficient,
    /// The fitted exponents leave a residual above the fit tolerance.
    PoorFit,
    /// `mu w` is not closed at tolerance.
    VerificationFailed,
    /// `mu` vanishes or is undefined at a sample.
    Vanishes,
    /// `mu` has a pole or branch point inside the domain.
    Singular,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rejection {
    pub family: Family,
    pub reason: RejectReason,
    pub detail: String,
}

fn reject(family: Family, reason: RejectReason, detail: impl Into<String>) -> Rejection {
    Rejection {
        family,
        reason,
        detail: detail.into(),
    }
}

/// The checks every candidate must pass.
pub fn verify(w: &OneForm, u: &Domain, mu: Expr, family: Family) -> Result<MuCandidate, Rejection> {
    if let Some(detail) = singular_in_domain(&mu, u) {
        return Err(reject(family, RejectReason::Singular, detail));
    }
    let samples: Vec<Point> = u.sampler().take(DEFAULT_SAMPLES).collect();
    for p in &samples {
        match mu.eval(*p) {
            Ok(v) if v.abs() > NONVANISHING_TOL => {}
            Ok(v) => {
                return Err(reject(
                    family,
                    RejectReason::Vanishes,
                    format!("mu = {mu} is {v:e} at ({}, {})", p.x, p.y),
                ))
            }
            Err(e) => {
                return Err(reject(
                    family,
                    RejectReason::Vanishes,
                    format!("mu = {mu} is undefined at ({}, {}): {e}", p.x, p.y),
                ))
            }
        }
    }
    let scaled = forms::scale(w, &mu);
    let closedness = forms::is_closed(&scaled, u, DEFAULT_SAMPLES, VERIFY_TOL)
        .map_err(|e| reject(family, RejectReason::VerificationFailed, e.to_string()))?;
    if !closedness.closed {
        return Err(reject(
            family,
            RejectReason::VerificationFailed,
            format!(
                "mu = {mu} leaves closedness residual {:e}",
                closedness.max_residual
            ),
        ));
    }
    Ok(MuCandidate {
        family,
        mu,
        verified: true,
        residual: closedness.max_residual,
        nonvanishing_checked: true,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Guard {
    NonZero,
    Positive,
}

/// Sub-expressions that must stay nonzero or positive for `e` to be defined.
fn collect_guards(e: &Expr, out: &mut Vec<(Expr, Guard)>) {
    match e {
        Expr::Const(_) | Expr::Var(_) => {}
        Expr::Neg(a) => collect_guards(a, out),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            collect_guards(a, out);
            collect_guards(b, out);
        }
        Expr::Div(a, b) => {
            collect_guards(a, out);
            collect_guards(b, out);
            nonzero_leaves(b, out);
        }
        Expr::Pow(b, k) => {
            collect_guards(b, out);
            collect_guards(k, out);
            match k.as_const() {
                Some(c) if c.fract() == 0.0 && c >= 0.0 => {}
                Some(c) if c.fract() == 0.0 => nonzero_leaves(b, out),
                _ => out.push(((**b).clone(), Guard::Positive)),
            }
        }
        Expr::Call(f, a) => {
            collect_guards(a, out);
            if matches!(f, Func::Log | Func::Sqrt) {
                out.push(((**a).clone(), Guard::Positive));
            }
        }
    }
}

/// Splits a nonzero requirement over products and powers.
fn nonzero_leaves(e: &Expr, out: &mut Vec<(Expr, Guard)>) {
    match e {
        Expr::Const(_) | Expr::Call(Func::Exp, _) => {}
        Expr::Neg(a) | Expr::Pow(a, _) => nonzero_leaves(a, out),
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            nonzero_leaves(a, out);
            nonzero_leaves(b, out);
        }
        other => out.push((other.clone(), Guard::NonZero)),
    }
}

/// Looks for a guard that fails somewhere in the domain, using a grid of
/// admissible points. A sign change of a continuous guard between two
/// admissible points puts a zero in the (connected) domain.
fn singular_in_domain(mu: &Expr, u: &Domain) -> Option<String> {
    let mut guards = Vec::new();
    collect_guards(mu, &mut guards);
    if guards.is_empty() {
        return None;
    }
    let [xmin, xmax, ymin, ymax] = u.rect();
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * (i as f64 + 0.5) / GUARD_GRID as f64;
    let grid: Vec<Point> = (0..GUARD_GRID)
        .flat_map(|i| (0..GUARD_GRID).map(move |j| (i, j)))
        .map(|(i, j)| Point::new(step(xmin, xmax, i), step(ymin, ymax, j)))
        .chain(u.sampler().take(DEFAULT_SAMPLES))
        .filter(|p| u.is_admissible(*p))
        .collect();
    for (g, kind) in guards {
        let values: Vec<f64> = grid.iter().filter_map(|p| g.eval(*p).ok()).collect();
        let has_pos = values.iter().any(|v| *v > 0.0);
        let has_neg = values.iter().any(|v| *v < 0.0);
        let has_zero = values.iter().any(|v| *v == 0.0);
        let bad = match kind {
            Guard::NonZero => (has_pos && has_neg) || has_zero,
            Guard::Positive => has_neg || has_zero,
        };
        if bad {
            let what = match kind {
                Guard::NonZero => "vanishes",
                Guard::Positive => "is not positive",
            };
            return Some(format!("{g} {what} inside the domain, so mu = {mu} is singular there"));
        }
    }
    None
}

/// Family 1 and 2 share this: `ratio` must not depend on `other`, then
/// `mu = exp ∫ ratio d(var)`.
fn single_variable(
    w: &OneForm,
    u: &Domain,
    family: Family,
    ratio: Expr,
    var: Var,
) -> Result<MuCandidate, Rejection> {
    let pts: Vec<Point> = u.sampler().take(2 * FIT_SAMPLES).collect();
    let (firsts, seconds) = pts.split_at(FIT_SAMPLES);
    let mut pairs = 0;
    for (p, q) in firsts.iter().zip(seconds) {
        let moved = match var {
            Var::X => Point::new(p.x, q.y),
            Var::Y => Point::new(q.x, p.y),
        };
        if !u.is_admissible(moved) {
            continue;
        }
        let (Ok(a), Ok(b)) = (ratio.eval(*p), ratio.eval(moved)) else {
            continue;
        };
        pairs += 1;
        if (a - b).abs() > 1e-8 * (1.0 + a.abs() + b.abs()) {
            return Err(reject(
                family,
                RejectReason::NotApplicable,
                format!(
                    "{ratio} depends on {}: {a} at ({}, {}) vs {b} at ({}, {})",
                    var.other().name(),
                    p.x,
                    p.y,
                    moved.x,
                    moved.y
                ),
            ));
        }
    }
    if pairs < MIN_FIT_ROWS {
        return Err(reject(
            family,
            RejectReason::SamplingFailed,
            format!("only {pairs} usable sample pairs for {ratio}"),
        ));
    }
    let Some(antiderivative) = integrate_symbolic(&ratio, var) else {
        return Err(reject(
            family,
            RejectReason::NoRule,
            format!("no antiderivative rule for {ratio} d{}", var.name()),
        ));
    };
    verify(w, u, antiderivative.exp().simplify(), family)
}

/// `mu(x) = exp ∫ (M_y - N_x)/N dx` when that ratio depends on `x` alone.
pub fn try_mu_x(w: &OneForm, u: &Domain) -> Result<MuCandidate, Rejection> {
    let h = w.m.diff(Var::Y).sub(w.n.diff(Var::X)).div(w.n.clone()).simplify();
    single_variable(w, u, Family::XOnly, h, Var::X)
}

/// `mu(y) = exp ∫ (N_x - M_y)/M dy` when that ratio depends on `y` alone.
pub fn try_mu_y(w: &OneForm, u: &Domain) -> Result<MuCandidate, Rejection> {
    let g = w.n.diff(Var::X).sub(w.m.diff(Var::Y)).div(w.m.clone()).simplify();
    single_variable(w, u, Family::YOnly, g, Var::Y)
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= SNAP_WINDOW {
        r + 0.0
    } else {
        v
    }
}

/// Rows `(a_1, .., a_k; b)` of a pointwise linear condition.
fn fit_rows<const K: usize, F>(u: &Domain, row: F) -> Vec<([f64; K], f64)>
where
    F: Fn(Point) -> Option<([f64; K], f64)> + Sync + Send,
{
    let pts: Vec<Point> = u.sampler().take(FIT_SAMPLES).collect();
    Exec::default()
        .map(&pts, |p| row(*p))
        .into_iter()
        .flatten()
        .filter(|(a, b)| a.iter().all(|v| v.is_finite()) && b.is_finite())
        .collect()
}

fn fit_residual<const K: usize>(rows: &[([f64; K], f64)], s: [f64; K]) -> f64 {
    let scale = rows.iter().map(|(_, b)| b.abs()).fold(1.0, f64::max);
    rows.iter()
        .map(|(a, b)| (a.iter().zip(&s).map(|(ai, si)| ai * si).sum::<f64>() - b).abs())
        .fold(0.0, f64::max)
        / scale
}

/// One-column least squares; `None` when the column vanishes.
fn lstsq1(rows: &[([f64; 1], f64)]) -> Option<f64> {
    let aa: f64 = rows.iter().map(|(a, _)| a[0] * a[0]).sum();
    let ab: f64 = rows.iter().map(|(a, b)| a[0] * b).sum();
    let scale = rows.iter().map(|(a, _)| a[0].abs()).fold(0.0, f64::max);
    if scale == 0.0 || aa <= 1e-24 * scale * scale * rows.len() as f64 {
        None
    } else {
        Some(ab / aa)
    }
}

/// Two-column least squares. Full rank gives one solution; a rank-one
/// system gives the minimum-norm solution followed by the fits with one
/// exponent pinned to zero.
fn lstsq2(rows: &[([f64; 2], f64)]) -> Vec<[f64; 2]> {
    let col = |k: usize| rows.iter().map(move |(a, _)| a[k]);
    let n1: f64 = col(0).map(|v| v * v).sum::<f64>().sqrt();
    let n2: f64 = col(1).map(|v| v * v).sum::<f64>().sqrt();
    let only = |k: usize| -> Option<[f64; 2]> {
        let sub: Vec<([f64; 1], f64)> = rows.iter().map(|(a, b)| ([a[k]], *b)).collect();
        let v = lstsq1(&sub)?;
        let mut s = [0.0; 2];
        s[k] = v;
        Some(s)
    };
    if n1 == 0.0 && n2 == 0.0 {
        return vec![[0.0, 0.0]];
    }
    if n1 == 0.0 || n2 == 0.0 {
        return [only(0), only(1)].into_iter().flatten().collect();
    }
    // normal equations on unit-norm columns
    let g12: f64 = rows.iter().map(|(a, _)| a[0] * a[1]).sum::<f64>() / (n1 * n2);
    let r1: f64 = rows.iter().map(|(a, b)| a[0] * b).sum::<f64>() / n1;
    let r2: f64 = rows.iter().map(|(a, b)| a[1] * b).sum::<f64>() / n2;
    let det = 1.0 - g12 * g12;
    if det > 1e-10 {
        let z1 = (r1 - g12 * r2) / det;
        let z2 = (r2 - g12 * r1) / det;
        return vec![[z1 / n1, z2 / n2]];
    }
    // columns are parallel: A ≈ c1 (1, t) with t = g12 * n2 / n1 in original units
    let t = g12 * n2 / n1;
    let c1: f64 = rows.iter().map(|(a, b)| a[0] * b).sum::<f64>() / (n1 * n1);
    let norm = 1.0 + t * t;
    let min_norm = [c1 / norm, c1 * t / norm];
    std::iter::once(Some(min_norm))
        .chain([only(0), only(1)])
        .flatten()
        .collect()
}

fn power_law_mu(a: f64, b: f64) -> Expr {
    let mut mu = Expr::one();
    if a != 0.0 {
        mu = mu.mul(Expr::x().pow(Expr::constant(a)));
    }
    if b != 0.0 {
        mu = mu.mul(Expr::y().pow(Expr::constant(b)));
    }
    mu.simplify()
}

/// `mu = x^a y^b` with `(a, b)` fitted by least squares.
pub fn try_mu_power(w: &OneForm, u: &Domain) -> Result<MuCandidate, Rejection> {
    let family = Family::PowerLaw;
    let my = w.m.diff(Var::Y);
    let nx = w.n.diff(Var::X);
    let rows = fit_rows::<2, _>(u, |p| {
        if p.x.abs() < 1e-6 || p.y.abs() < 1e-6 {
            return None;
        }
        let (m, n) = (w.m.eval(p).ok()?, w.n.eval(p).ok()?);
        let rhs = my.eval(p).ok()? - nx.eval(p).ok()?;
        Some(([n / p.x, -m / p.y], rhs))
    });
    if rows.len() < MIN_FIT_ROWS {
        return Err(reject(
            family,
            RejectReason::SamplingFailed,
            format!("only {} usable fit rows", rows.len()),
        ));
    }
    let solutions = lstsq2(&rows);
    if solutions.is_empty() {
        return Err(reject(family, RejectReason::RankDeficient, "degenerate fit system"));
    }
    let mut last = reject(family, RejectReason::RankDeficient, "no fitted exponents");
    for s in solutions {
        let raw = fit_residual(&rows, s);
        if raw > FIT_TOL {
            last = reject(
                family,
                RejectReason::PoorFit,
                format!("x^{} y^{} leaves fit residual {raw:e}", s[0], s[1]),
            );
            continue;
        }
        let (a, b) = (snap(s[0]), snap(s[1]));
        match verify(w, u, power_law_mu(a, b), family) {
            Ok(c) => return Ok(c),
            Err(r) => last = r,
        }
    }
    Err(last)
}

/// `mu = (x^2 + y^2)^k` with `k` fitted by least squares.
pub fn try_mu_radial(w: &OneForm, u: &Domain) -> Result<MuCandidate, Rejection> {
    let family = Family::Radial;
    let my = w.m.diff(Var::Y);
    let nx = w.n.diff(Var::X);
    let rows = fit_rows::<1, _>(u, |p| {
        let s = p.x * p.x + p.y * p.y;
        if s == 0.0 {
            return None;
        }
        let (m, n) = (w.m.eval(p).ok()?, w.n.eval(p).ok()?);
        let rhs = nx.eval(p).ok()? - my.eval(p).ok()?;
        Some(([(2.0 * p.y * m - 2.0 * p.x * n) / s], rhs))
    });
    if rows.len() < MIN_FIT_ROWS {
        return Err(reject(
            family,
            RejectReason::SamplingFailed,
            format!("only {} usable fit rows", rows.len()),
        ));
    }
    let k = match lstsq1(&rows) {
        Some(k) => k,
        None if rows.iter().all(|(_, b)| b.abs() <= FIT_TOL) => 0.0,
        None => {
            return Err(reject(
                family,
                RejectReason::RankDeficient,
                "2yM - 2xN vanishes on the samples",
            ))
        }
    };
    let raw = fit_residual(&rows, [k]);
    if raw > FIT_TOL {
        return Err(reject(
            family,
            RejectReason::PoorFit,
            format!("k = {k} leaves fit residual {raw:e}"),
        ));
    }
    let k = snap(k);
    let origin = Point::new(0.0, 0.0);
    if k < 0.0 && u.in_rect(origin) && u.contains(origin) {
        return Err(reject(
            family,
            RejectReason::Singular,
            format!("(x^2 + y^2)^{k} is singular at the origin, which is inside the domain"),
        ));
    }
    let mu = if k == 0.0 {
        Expr::one()
    } else {
        Expr::x()
            .powi(2)
            .add(Expr::y().powi(2))
            .pow(Expr::constant(k))
            .simplify()
    };
    verify(w, u, mu, family)
}

pub fn try_family(family: Family, w: &OneForm, u: &Domain) -> Result<MuCandidate, Rejection> {
    match family {
        Family::XOnly => try_mu_x(w, u),
        Family::YOnly => try_mu_y(w, u),
        Family::PowerLaw => try_mu_power(w, u),
        Family::Radial => try_mu_radial(w, u),
    }
}

/// Outcome of the whole ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorSearch {
    /// First verified candidate in ladder order, with `mu w`.
    pub found: Option<(MuCandidate, OneForm)>,
    /// Rejections of the families tried before the hit (or all of them).
    pub rejections: Vec<Rejection>,
}

impl FactorSearch {
    /// No family produced a factor. This is a heuristic failure, not a proof
    /// that none exists.
    pub fn exhausted(&self) -> bool {
        self.found.is_none()
    }
}

/// Runs the ladder. The families may be evaluated concurrently; the result is
/// always the first verified candidate in ladder order.
pub fn find_integrating_factor(w: &OneForm, u: &Domain) -> FactorSearch {
    find_integrating_factor_with(w, u, Exec::default())
}

pub fn find_integrating_factor_with(w: &OneForm, u: &Domain, exec: Exec) -> FactorSearch {
    let outcomes = exec.map(&Family::LADDER, |f| try_family(*f, w, u));
    let mut rejections = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(candidate) => {
                let scaled = forms::scale(w, &candidate.mu);
                return FactorSearch {
                    found: Some((candidate, scaled)),
                    rejections,
                };
            }
            Err(r) => rejections.push(r),
        }
    }
    FactorSearch {
        found: None,
        rejections,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn form(m: &str, n: &str) -> OneForm {
        OneForm::parse(m, n).unwrap()
    }

    fn strip_x() -> Domain {
        Domain::rectangle(0.5, 2.0, -1.0, 1.0).unwrap()
    }

    fn strip_y() -> Domain {
        Domain::rectangle(-1.0, 1.0, 0.5, 2.0).unwrap()
    }

    fn punctured_box() -> Domain {
        Domain::rectangle(-2.0, 2.0, -2.0, 2.0)
            .unwrap()
            .with_puncture(Point::new(0.0, 0.0))
            .unwrap()
    }

    fn exact_form() -> OneForm {
        OneForm::exact(&parse("x^2*y + x + sin(y)").unwrap())
    }

    fn proportional(a: &Expr, b: &Expr, u: &Domain) -> bool {
        let ratios: Vec<f64> = u
            .sampler()
            .take(50)
            .map(|p| a.eval(p).unwrap() / b.eval(p).unwrap())
            .collect();
        ratios.iter().all(|r| (r - ratios[0]).abs() <= 1e-12 * ratios[0].abs())
    }

    /// mu (M_y - N_x) + mu_y M - mu_x N at samples.
    fn pde_residual(w: &OneForm, mu: &Expr, u: &Domain) -> f64 {
        let expr = mu
            .clone()
            .mul(w.m.diff(Var::Y).sub(w.n.diff(Var::X)))
            .add(mu.diff(Var::Y).mul(w.m.clone()))
            .sub(mu.diff(Var::X).mul(w.n.clone()));
        u.sampler()
            .take(100)
            .map(|p| expr.eval(p).unwrap().abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn x_only_factor_on_strip() {
        let w = form("y", "-x");
        let c = try_mu_x(&w, &strip_x()).unwrap();
        assert_eq!(c.family, Family::XOnly);
        assert!(proportional(&c.mu, &parse("x^-2").unwrap(), &strip_x()));
        assert!(c.verified && c.nonvanishing_checked && c.residual <= VERIFY_TOL);
        assert!(pde_residual(&w, &c.mu, &strip_x()) < 1e-12);
    }

    #[test]
    fn closed_input_needs_no_factor() {
        for f in [try_mu_x, try_mu_y, try_mu_power, try_mu_radial] {
            let c = f(&exact_form(), &punctured_box()).unwrap();
            assert_eq!(c.mu, Expr::one(), "{:?}", c.family);
        }
        let c = try_mu_y(&form("3*x^2*y", "x^3"), &strip_y()).unwrap();
        assert_eq!(c.mu, Expr::one());
    }

    #[test]
    fn y_dependent_ratio_is_not_applicable() {
        // h = -2/(x + y)
        let r = try_mu_x(&OneForm::parse("-y", "x+y").unwrap(), &punctured_box()).unwrap_err();
        assert_eq!(r.reason, RejectReason::NotApplicable);
    }

    #[test]
    fn y_only_factor_on_strip() {
        let w = form("y", "-x");
        let c = try_mu_y(&w, &strip_y()).unwrap();
        assert!(proportional(&c.mu, &parse("y^-2").unwrap(), &strip_y()));
        assert!(pde_residual(&w, &c.mu, &strip_y()) < 1e-12);
    }

    #[test]
    fn power_law_falls_back_from_singular_min_norm_solution() {
        // a + b = -2 is rank one; min-norm (-1,-1) is singular on y = 0
        let w = form("y", "-x");
        let c = try_mu_power(&w, &strip_x()).unwrap();
        assert!(proportional(&c.mu, &parse("x^-2").unwrap(), &strip_x()));
    }

    #[test]
    fn power_law_with_full_rank_fit() {
        // mu = x y^2 makes x^-1 y^-2 d(x^2 y^3 / ...) closed: w = d(x^2 y) / (x y^2)
        let f = parse("x^2*y").unwrap();
        let w = forms::scale(&OneForm::exact(&f), &parse("x^-1*y^-2").unwrap());
        let u = Domain::rectangle(0.5, 2.0, 0.5, 2.0).unwrap();
        let c = try_mu_power(&w, &u).unwrap();
        assert!(forms::is_closed(&forms::scale(&w, &c.mu), &u, 256, 1e-8).unwrap().closed);
    }

    #[test]
    fn power_law_finds_half_integer_exponents() {
        // (x y)^(-5/2) is a factor; exponents are not snapped
        let w = form("y + x^2*y^2", "x - x^3*y");
        let u = Domain::rectangle(0.5, 2.0, 0.5, 2.0).unwrap();
        let c = try_mu_power(&w, &u).unwrap();
        assert!(proportional(&c.mu, &parse("(x*y)^-2.5").unwrap(), &u));
    }

    #[test]
    fn power_law_rejects_forms_without_such_factor() {
        let w = form("y + x^2*y^2", "x - x^3*y + sin(x)");
        let u = Domain::rectangle(0.5, 2.0, 0.5, 2.0).unwrap();
        assert!(try_mu_power(&w, &u).is_err());
    }

    #[test]
    fn radial_factor() {
        for w in [form("-y", "x"), form("-y", "x")] {
            let c = try_mu_radial(&w, &punctured_box()).unwrap();
            assert_eq!(c.mu.to_string(), "1/(x^2 + y^2)");
            assert!(pde_residual(&w, &c.mu, &punctured_box()) < 1e-10);
        }
        let unpunctured = Domain::rectangle(-2.0, 2.0, -2.0, 2.0).unwrap();
        let r = try_mu_radial(&form("-y", "x"), &unpunctured).unwrap_err();
        assert_eq!(r.reason, RejectReason::Singular);
    }

    #[test]
    fn singular_guards() {
        let d = punctured_box();
        assert!(singular_in_domain(&parse("1/x^2").unwrap(), &d).is_some());
        assert!(singular_in_domain(&parse("1/(x^2+y^2)").unwrap(), &d).is_none());
        assert!(singular_in_domain(&parse("log(x+3)").unwrap(), &d).is_none());
        assert!(singular_in_domain(&parse("sqrt(x)").unwrap(), &d).is_some());
        assert!(singular_in_domain(&parse("exp(x)*y^2").unwrap(), &d).is_none());
    }

    #[test]
    fn ladder_order_and_strip_result() {
        let s = find_integrating_factor(&form("y", "-x"), &strip_x());
        let (c, scaled) = s.found.unwrap();
        assert_eq!(c.family, Family::XOnly);
        assert!(s.rejections.is_empty());
        assert!(crate::cohomology::classify(&scaled, &strip_x(), 1e-10).unwrap().is_exact());
    }

    #[test]
    fn ladder_on_punctured_box_reaches_radial() {
        for exec in [Exec::Sequential, Exec::Parallel] {
            let s = find_integrating_factor_with(&form("-y", "x"), &punctured_box(), exec);
            let (c, scaled) = s.found.clone().unwrap();
            assert_eq!(c.family, Family::Radial);
            let reasons: Vec<_> = s.rejections.iter().map(|r| r.reason).collect();
            assert_eq!(reasons[0], RejectReason::Singular);
            let cls = crate::cohomology::classify(&scaled, &punctured_box(), 1e-10).unwrap();
            assert_eq!(cls.kind, crate::cohomology::ClassKind::ClosedNotExact);
        }
    }

    #[test]
    fn exhausted_ladder() {
        let w = form("y + x^2*y^2", "x - x^3*y + sin(x)");
        let s = find_integrating_factor(&w, &Domain::rectangle(0.5, 2.0, 0.5, 2.0).unwrap());
        assert!(s.exhausted());
        assert_eq!(s.rejections.len(), 4);
    }

    #[test]
    fn candidate_json_shape() {
        let c = try_mu_x(&form("y", "-x"), &strip_x()).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["family"], "x_only");
        assert_eq!(v["mu"], "1/x^2");
        assert_eq!(v["verified"], true);
    }
}
