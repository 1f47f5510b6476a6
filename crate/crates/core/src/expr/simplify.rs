//! Best-effort simplification through a sum-of-monomials normal form.
//!
//! An expression is normalized into a [`Poly`]: a sorted list of terms
//! `coef * base_1^e_1 * ... * base_k^e_k`, where every base is itself a
//! simplified expression that is not a product or a constant. Constants are
//! folded, like terms are collected, products of sums are expanded and equal
//! bases combine their exponents (which cancels monomial ratios). Sums only
//! survive as bases when raised to an exponent other than 1.
//!
//! The printed form is chosen so that normalizing it again yields the same
//! `Poly`, which makes [`simplify`] idempotent.

use std::cmp::Ordering;

use super::eval::{apply_func, apply_pow};
use super::{Expr, Func};

#[derive(Clone, Debug)]
pub(crate) struct Factor {
    pub base: Expr,
    pub exp: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct Term {
    pub coef: f64,
    pub factors: Vec<Factor>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Poly {
    pub terms: Vec<Term>,
}

fn cmp_factor(a: &Factor, b: &Factor) -> Ordering {
    a.base
        .total_cmp(&b.base)
        .then_with(|| b.exp.total_cmp(&a.exp))
}

fn cmp_monomial(a: &[Factor], b: &[Factor]) -> Ordering {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ordering::Equal,
        // constant term goes last
        (true, false) => return Ordering::Greater,
        (false, true) => return Ordering::Less,
        _ => {}
    }
    for (fa, fb) in a.iter().zip(b) {
        let o = cmp_factor(fa, fb);
        if o != Ordering::Equal {
            return o;
        }
    }
    b.len().cmp(&a.len())
}

pub(crate) fn is_sum(e: &Expr) -> bool {
    matches!(e, Expr::Add(..) | Expr::Sub(..))
}

impl Term {
    fn constant(c: f64) -> Term {
        Term {
            coef: c,
            factors: Vec::new(),
        }
    }

    fn mul(&self, other: &Term) -> Term {
        let mut factors: Vec<Factor> = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() || j < other.factors.len() {
            let ord = match (self.factors.get(i), other.factors.get(j)) {
                (Some(a), Some(b)) => a.base.total_cmp(&b.base),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    factors.push(self.factors[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    factors.push(other.factors[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let exp = self.factors[i].exp + other.factors[j].exp;
                    if exp != 0.0 {
                        factors.push(Factor {
                            base: self.factors[i].base.clone(),
                            exp,
                        });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Term {
            coef: self.coef * other.coef,
            factors,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn constant(c: f64) -> Poly {
        if c == 0.0 {
            Poly::zero()
        } else {
            Poly {
                terms: vec![Term::constant(c)],
            }
        }
    }

    /// A single factor `base^exp`, which must already be in normal form.
    fn factor(base: Expr, exp: f64) -> Poly {
        Poly {
            terms: vec![Term {
                coef: 1.0,
                factors: vec![Factor { base, exp }],
            }],
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.as_slice() {
            [] => Some(0.0),
            [t] if t.is_constant() => Some(t.coef),
            _ => None,
        }
    }

    fn from_terms(terms: Vec<Term>) -> Poly {
        let mut out = Poly::zero();
        for t in terms {
            out.push_term(t);
        }
        out
    }

    /// Inserts a term, expanding any bare sum factor (exponent 1).
    fn push_term(&mut self, mut term: Term) {
        if term.coef == 0.0 || !term.coef.is_finite() {
            return;
        }
        if let Some(idx) = term
            .factors
            .iter()
            .position(|f| f.exp == 1.0 && is_sum(&f.base))
        {
            let sum = term.factors.remove(idx);
            let expanded = Poly { terms: vec![term] }.mul(&normalize(&sum.base));
            for t in expanded.terms {
                self.insert_sorted(t);
            }
            return;
        }
        self.insert_sorted(term);
    }

    fn insert_sorted(&mut self, term: Term) {
        match self
            .terms
            .binary_search_by(|t| cmp_monomial(&t.factors, &term.factors))
        {
            Ok(i) => {
                self.terms[i].coef += term.coef;
                if self.terms[i].coef == 0.0 {
                    self.terms.remove(i);
                }
            }
            Err(i) => self.terms.insert(i, term),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for t in &other.terms {
            out.insert_sorted(t.clone());
        }
        out
    }

    pub fn scale(&self, c: f64) -> Poly {
        Poly::from_terms(
            self.terms
                .iter()
                .map(|t| Term {
                    coef: t.coef * c,
                    factors: t.factors.clone(),
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for a in &self.terms {
            for b in &other.terms {
                out.push_term(a.mul(b));
            }
        }
        out
    }

    /// `(coef, factors)` view; sums become a single factor.
    fn monomial_view(&self) -> (f64, Vec<Factor>) {
        match self.terms.as_slice() {
            [t] => (t.coef, t.factors.clone()),
            _ => (
                1.0,
                vec![Factor {
                    base: self.to_expr(),
                    exp: 1.0,
                }],
            ),
        }
    }

    fn invert(&self) -> Option<Poly> {
        match self.terms.as_slice() {
            [] => None,
            [t] => {
                let coef = 1.0 / t.coef;
                if !coef.is_finite() {
                    return None;
                }
                let factors = t
                    .factors
                    .iter()
                    .map(|f| Factor {
                        base: f.base.clone(),
                        exp: -f.exp,
                    })
                    .collect();
                Some(Poly::from_terms(vec![Term { coef, factors }]))
            }
            _ => Some(Poly::factor(self.to_expr(), -1.0)),
        }
    }

    fn powf(&self, k: f64) -> Poly {
        if k == 0.0 {
            return Poly::constant(1.0);
        }
        if k == 1.0 {
            return self.clone();
        }
        if self.terms.is_empty() {
            return if k > 0.0 {
                Poly::zero()
            } else {
                opaque(Expr::zero().pow(Expr::constant(k)))
            };
        }
        let (coef, factors) = self.monomial_view();
        if factors.is_empty() {
            return match apply_pow(coef, k) {
                Ok(v) => Poly::constant(v),
                Err(_) => opaque(Expr::constant(coef).pow(Expr::constant(k))),
            };
        }
        if k.fract() == 0.0 {
            let c = coef.powf(k);
            if c.is_finite() && c != 0.0 {
                let factors = factors
                    .into_iter()
                    .map(|f| Factor {
                        base: f.base,
                        exp: f.exp * k,
                    })
                    .collect();
                return Poly::from_terms(vec![Term { coef: c, factors }]);
            }
        } else if coef == 1.0 && factors.len() == 1 && factors[0].exp == 1.0 {
            return Poly::factor(factors[0].base.clone(), k);
        }
        Poly::factor(self.to_expr(), k)
    }

    pub fn to_expr(&self) -> Expr {
        let mut out: Option<Expr> = None;
        for t in &self.terms {
            let negative = t.coef < 0.0;
            let magnitude = term_magnitude(t);
            out = Some(match out {
                None if negative => negate_leftmost(magnitude),
                None => magnitude,
                Some(acc) if negative => acc.sub(magnitude),
                Some(acc) => acc.add(magnitude),
            });
        }
        out.unwrap_or_else(Expr::zero)
    }
}

/// `-e` with the sign on the leftmost factor, so `-y/s` stays `(-y)/s`.
fn negate_leftmost(e: Expr) -> Expr {
    match e {
        Expr::Mul(a, b) => negate_leftmost(*a).mul(*b),
        Expr::Div(a, b) => negate_leftmost(*a).div(*b),
        Expr::Const(c) => Expr::constant(-c),
        other => other.neg(),
    }
}

fn opaque(e: Expr) -> Poly {
    Poly::factor(e, 1.0)
}

fn factor_expr(f: &Factor, exp: f64) -> Expr {
    if exp == 1.0 {
        f.base.clone()
    } else {
        f.base.clone().pow(Expr::constant(exp))
    }
}

fn chain(items: impl IntoIterator<Item = Expr>) -> Option<Expr> {
    items.into_iter().reduce(|acc, e| acc.mul(e))
}

/// `|coef| * numerator / denominator` for one term. Sum bases in the
/// denominator are divided out one at a time so that renormalizing does not
/// expand them together with the other factors.
fn term_magnitude(t: &Term) -> Expr {
    let c = t.coef.abs();
    let num = chain(t.factors.iter().filter(|f| f.exp > 0.0).map(|f| factor_expr(f, f.exp)));
    let mut e = match num {
        None => Expr::constant(c),
        Some(n) if c == 1.0 => n,
        Some(n) => chain(std::iter::once(Expr::constant(c)).chain(flatten_mul(n))).unwrap(),
    };
    let den_simple = chain(
        t.factors
            .iter()
            .filter(|f| f.exp < 0.0 && !is_sum(&f.base))
            .map(|f| factor_expr(f, -f.exp)),
    );
    if let Some(d) = den_simple {
        e = e.div(d);
    }
    for f in t.factors.iter().filter(|f| f.exp < 0.0 && is_sum(&f.base)) {
        e = e.div(factor_expr(f, -f.exp));
    }
    e
}

fn flatten_mul(e: Expr) -> Vec<Expr> {
    match e {
        Expr::Mul(a, b) => {
            let mut v = flatten_mul(*a);
            v.push(*b);
            v
        }
        other => vec![other],
    }
}

pub(crate) fn normalize(e: &Expr) -> Poly {
    match e {
        Expr::Const(c) => Poly::constant(*c),
        Expr::Var(_) => opaque(e.clone()),
        Expr::Neg(a) => normalize(a).scale(-1.0),
        Expr::Add(a, b) => normalize(a).add(&normalize(b)),
        Expr::Sub(a, b) => normalize(a).add(&normalize(b).scale(-1.0)),
        Expr::Mul(a, b) => normalize(a).mul(&normalize(b)),
        Expr::Div(a, b) => {
            let num = normalize(a);
            match normalize(b).invert() {
                Some(inv) => num.mul(&inv),
                None => opaque(num.to_expr().div(Expr::zero())),
            }
        }
        Expr::Pow(a, b) => {
            let base = normalize(a);
            let exponent = normalize(b);
            match exponent.as_constant() {
                Some(k) => base.powf(k),
                None => opaque(base.to_expr().pow(exponent.to_expr())),
            }
        }
        Expr::Call(func, a) => {
            let arg = normalize(a);
            if let Some(c) = arg.as_constant() {
                return match apply_func(*func, c) {
                    Ok(v) => Poly::constant(v),
                    Err(_) => opaque(Expr::call(*func, Expr::constant(c))),
                };
            }
            if *func == Func::Exp {
                // exp(c*log(u)) = u^c wherever the left side is defined
                if let [t] = arg.terms.as_slice() {
                    if let [f] = t.factors.as_slice() {
                        if let Expr::Call(Func::Log, u) = &f.base {
                            if f.exp == 1.0 {
                                return normalize(u).powf(t.coef);
                            }
                        }
                    }
                }
            }
            opaque(Expr::call(*func, arg.to_expr()))
        }
    }
}

/// Value-preserving rewrite into the normal form described in the module
/// docs. Idempotent.
pub fn simplify(e: &Expr) -> Expr {
    normalize(e).to_expr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn s(text: &str) -> String {
        simplify(&parse(text).unwrap()).to_string()
    }

    #[test]
    fn cancellation_and_identities() {
        assert_eq!(s("2*x - 2*x"), "0");
        assert_eq!(s("x*1 + 0"), "x");
        assert_eq!(s("sin(x)"), "sin(x)");
    }

    #[test]
    fn constant_folding() {
        assert_eq!(s("2*3 + 4^0.5"), "8");
        assert_eq!(s("cos(0) + log(1)"), "1");
        assert_eq!(s("1/0"), "1/0");
        assert_eq!(s("log(-1)"), "log(-1)");
    }

    #[test]
    fn monomial_ratios_cancel() {
        assert_eq!(s("x^3*y/(x*y^2)"), "x^2/y");
        assert_eq!(s("(2*x*y)/(4*x)"), "0.5*y");
        assert_eq!(s("x^0.5*x^0.5"), "x");
    }

    #[test]
    fn like_terms_collect() {
        assert_eq!(s("x*y + y*x + 3 - 1"), "2*x*y + 2");
        assert_eq!(s("(x+1)*(x-1)"), "x^2 - 1");
    }

    #[test]
    fn sums_in_denominators_stay_factored() {
        assert_eq!(s("x/(x^2+y^2)"), "x/(x^2 + y^2)");
        assert_eq!(s("-y/(x^2+y^2)"), "-y/(x^2 + y^2)");
        assert_eq!(s("(x^2+y^2)^2/(x^2+y^2)"), "x^2 + y^2");
    }

    #[test]
    fn exp_of_scaled_log_becomes_power() {
        assert_eq!(s("exp(-2*log(x))"), "1/x^2");
        assert_eq!(s("exp(0.5*log(x^2+y^2))"), "(x^2 + y^2)^0.5");
    }

    #[test]
    fn fractional_powers_do_not_merge_through_even_powers() {
        // (x^2)^0.5 is |x|, not x
        let e = parse("(x^2)^0.5").unwrap();
        let out = simplify(&e);
        assert_eq!(out.eval_xy(-3.0, 0.0).unwrap(), 3.0);
    }

    #[test]
    fn idempotent_on_examples() {
        for text in [
            "2*x*y+1",
            "x/(x^2+y^2) - y/(x^2+y^2)^2*x",
            "(x+y)^3*(x-y)/(x*y+1)",
            "exp(x)*exp(-x) + sin(x)^2",
            "(x^2)^0.5 + (2*x)^0.5*y",
            "x^y*x^y/(1+x)^-2",
        ] {
            let once = simplify(&parse(text).unwrap());
            let twice = simplify(&once);
            assert_eq!(once, twice, "{text}");
        }
    }
}
