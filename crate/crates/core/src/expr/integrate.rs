//! Rule-based antiderivatives.
//!
//! The integrand is normalized first and integrated term by term. Factors
//! that do not mention the integration variable are carried along as
//! coefficients, so "polynomial in x with coefficients in y" is handled by
//! the power rule. The remaining rules cover:
//!
//! * `v^n` (`log(v)` when n = -1), and `(a*v + b)^n` likewise
//! * `sin`, `cos`, `exp` of an argument linear in `v`
//! * `v * (a*v^2 + b)^n`, including `n = -1` giving `log(a*v^2 + b) / (2a)`
//! * `1 / (a*v^2 + b)` with numeric `a, b > 0`, giving an `atan`
//!
//! Anything else returns `None`.

use std::collections::BTreeMap;

use super::simplify::{normalize, Factor, Poly, Term};
use super::{Expr, Func, Var};

/// Splits `p` by integer powers of `v`. Every other factor must be free of `v`.
fn coefficients_by_power(p: &Poly, v: Var) -> Option<BTreeMap<i64, Expr>> {
    let mut by_power: BTreeMap<i64, Poly> = BTreeMap::new();
    for term in &p.terms {
        let mut power = 0i64;
        let mut rest = Vec::new();
        for f in &term.factors {
            if f.base == Expr::Var(v) {
                if f.exp.fract() != 0.0 {
                    return None;
                }
                power = f.exp as i64;
            } else if f.base.depends_on(v) {
                return None;
            } else {
                rest.push(f.clone());
            }
        }
        let piece = Poly {
            terms: vec![Term {
                coef: term.coef,
                factors: rest,
            }],
        };
        let slot = by_power.entry(power).or_default();
        *slot = slot.add(&piece);
    }
    Some(
        by_power
            .into_iter()
            .filter(|(_, c)| !c.terms.is_empty())
            .map(|(k, c)| (k, c.to_expr()))
            .collect(),
    )
}

/// `base = a*v + b` with `a != 0`; returns `a`.
fn linear_slope(base: &Expr, v: Var) -> Option<Expr> {
    let coeffs = coefficients_by_power(&normalize(base), v)?;
    if coeffs.keys().any(|&k| k != 0 && k != 1) {
        return None;
    }
    coeffs.get(&1).cloned()
}

/// `base = a*v^2 + b` with `a != 0`; returns `(a, b)`.
fn even_quadratic(base: &Expr, v: Var) -> Option<(Expr, Expr)> {
    let coeffs = coefficients_by_power(&normalize(base), v)?;
    if coeffs.keys().any(|&k| k != 0 && k != 2) {
        return None;
    }
    let a = coeffs.get(&2)?.clone();
    let b = coeffs.get(&0).cloned().unwrap_or_else(Expr::zero);
    Some((a, b))
}

/// Antiderivative of `base^exp` where `base` is linear in `v` with slope `a`.
fn linear_power(base: &Expr, exp: f64, a: Expr) -> Expr {
    if exp == -1.0 {
        base.clone().log().div(a)
    } else {
        let n1 = exp + 1.0;
        base.clone()
            .pow(Expr::constant(n1))
            .div(a.mul(Expr::constant(n1)))
    }
}

/// Antiderivative of the product of the `v`-dependent factors of one term.
fn integrate_dependent(factors: &[Factor], v: Var) -> Option<Expr> {
    let var = Expr::Var(v);
    match factors {
        [] => Some(var),
        [f] => {
            if let Some(a) = linear_slope(&f.base, v) {
                return Some(linear_power(&f.base, f.exp, a));
            }
            if let Expr::Call(func, arg) = &f.base {
                if f.exp != 1.0 {
                    return None;
                }
                let a = linear_slope(arg, v)?;
                let arg = (**arg).clone();
                return match func {
                    Func::Sin => Some(arg.cos().neg().div(a)),
                    Func::Cos => Some(arg.sin().div(a)),
                    Func::Exp => Some(arg.exp().div(a)),
                    _ => None,
                };
            }
            if f.exp == -1.0 {
                let (a, b) = even_quadratic(&f.base, v)?;
                let (a, b) = (a.as_const()?, b.as_const()?);
                if a > 0.0 && b > 0.0 {
                    let scale = (a / b).sqrt();
                    return Some(
                        var.mul(Expr::constant(scale))
                            .atan()
                            .div(Expr::constant((a * b).sqrt())),
                    );
                }
            }
            None
        }
        [p, q] => {
            // v * (a v^2 + b)^n, in either factor order
            let (s, lin) = if p.base == var && p.exp == 1.0 {
                (q, p)
            } else if q.base == var && q.exp == 1.0 {
                (p, q)
            } else {
                return None;
            };
            debug_assert_eq!(lin.base, var);
            let (a, _) = even_quadratic(&s.base, v)?;
            let two_a = Expr::constant(2.0).mul(a);
            Some(linear_power(&s.base, s.exp, two_a))
        }
        _ => None,
    }
}

/// Antiderivative of `e` with respect to `v`, or `None` when no rule
/// applies. The integration constant is dropped.
pub fn integrate_symbolic(e: &Expr, v: Var) -> Option<Expr> {
    let poly = normalize(e);
    let mut total = Poly::zero();
    for term in &poly.terms {
        let (dependent, free): (Vec<Factor>, Vec<Factor>) = term
            .factors
            .iter()
            .cloned()
            .partition(|f| f.base.depends_on(v));
        let antiderivative = integrate_dependent(&dependent, v)?;
        let coefficient = Poly {
            terms: vec![Term {
                coef: term.coef,
                factors: free,
            }],
        };
        total = total.add(&coefficient.mul(&normalize(&antiderivative)));
    }
    Some(total.to_expr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn int(text: &str, v: Var) -> Option<String> {
        integrate_symbolic(&parse(text).unwrap(), v).map(|e| e.to_string())
    }

    #[test]
    fn polynomial_with_parametric_coefficients() {
        assert_eq!(int("2*x*y + 1", Var::X).as_deref(), Some("x^2*y + x"));
        assert_eq!(int("cos(y)", Var::Y).as_deref(), Some("sin(y)"));
        assert_eq!(int("0", Var::Y).as_deref(), Some("0"));
    }

    #[test]
    fn outside_rule_set() {
        assert_eq!(int("exp(x^2)", Var::X), None);
        assert_eq!(int("sin(x)*x", Var::X), None);
        assert_eq!(int("1/(x^2+y^2)", Var::X), None);
    }

    #[test]
    fn logarithmic_rules() {
        assert_eq!(int("3/x", Var::X).as_deref(), Some("3*log(x)"));
        let e = integrate_symbolic(&parse("x/(x^2+y^2)").unwrap(), Var::X).unwrap();
        let want = parse("0.5*log(x^2+y^2)").unwrap();
        assert_eq!(e, crate::expr::simplify(&want));
    }

    #[test]
    fn arctangent_rule() {
        let g = integrate_symbolic(&parse("2/(x^2+4)").unwrap(), Var::X).unwrap();
        let want = parse("atan(x/2)").unwrap();
        for x in [-3.0, -0.1, 0.4, 2.5] {
            let (a, b) = (g.eval_xy(x, 0.0).unwrap(), want.eval_xy(x, 0.0).unwrap());
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_arguments() {
        assert_eq!(int("exp(2*x)", Var::X).as_deref(), Some("0.5*exp(2*x)"));
        assert_eq!(int("y*cos(x*y)", Var::X).as_deref(), Some("sin(x*y)"));
        assert!(int("(2*x+1)^3", Var::X).is_some());
    }
}
