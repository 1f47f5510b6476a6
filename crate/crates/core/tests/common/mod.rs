//! Random expressions and polynomials shared by the property and acceptance
//! suites.
#![allow(dead_code)]

use deform_core::expr::Func;
use deform_core::Expr;
use proptest::prelude::*;
use rand::Rng;

/// Expressions that are defined everywhere: denominators are bounded away
/// from zero and logs and roots take positive arguments.
pub fn smooth_expr(rng: &mut impl Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => Expr::constant((rng.gen_range(-3.0f64..3.0) * 100.0).round() / 100.0),
            1 => Expr::x(),
            _ => Expr::y(),
        };
    }
    let a = smooth_expr(rng, depth - 1);
    let b = smooth_expr(rng, depth - 1);
    match rng.gen_range(0..10) {
        0 => a.add(b),
        1 => a.sub(b),
        2 | 3 => a.mul(b),
        4 => a.div(Expr::constant(2.0).add(b.sin())),
        5 => a.powi(rng.gen_range(2..4)),
        6 => a.sin(),
        7 => a.cos(),
        8 => a.atan(),
        _ => Expr::one().add(a.powi(2)).log(),
    }
}

/// `sum c_ij x^i y^j` over `i + j <= degree` with coefficients in [-3, 3].
pub fn random_polynomial(rng: &mut impl Rng, degree: u32) -> Expr {
    let mut f = Expr::zero();
    for i in 0..=degree {
        for j in 0..=(degree - i) {
            if rng.gen_bool(0.6) {
                let c = rng.gen_range(-3.0..3.0);
                f = f.add(Expr::constant(c).mul(Expr::x().powi(i as i32)).mul(Expr::y().powi(j as i32)));
            }
        }
    }
    f
}

pub fn arb_smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3.0f64..3.0).prop_map(|c| Expr::constant((c * 100.0).round() / 100.0)),
        Just(Expr::x()),
        Just(Expr::y()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.div(Expr::constant(2.0).add(b.cos()))),
            (inner.clone(), 2i32..4).prop_map(|(a, k)| a.powi(k)),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            inner.clone().prop_map(Expr::atan),
            inner.clone().prop_map(|a| Expr::one().add(a.powi(2)).log()),
        ]
    })
}

/// Any expression the grammar can produce, including ones with undefined
/// points; used where only structure matters.
pub fn arb_any_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-1e3f64..1e3).prop_map(Expr::constant),
        Just(Expr::x()),
        Just(Expr::y()),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.div(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.pow(b)),
            (prop::sample::select(Func::ALL.to_vec()), inner).prop_map(|(f, a)| Expr::call(f, a)),
        ]
    })
}

/// Polynomials in `x` with coefficients polynomial in `y`: inside the
/// integration rule set.
pub fn arb_polynomial(degree: u32) -> impl Strategy<Value = Expr> {
    let n = ((degree + 1) * (degree + 2) / 2) as usize;
    prop::collection::vec(-3.0f64..3.0, n).prop_map(move |cs| {
        let mut f = Expr::zero();
        let mut k = 0;
        for i in 0..=degree {
            for j in 0..=(degree - i) {
                f = f.add(Expr::constant(cs[k]).mul(Expr::x().powi(i as i32)).mul(Expr::y().powi(j as i32)));
                k += 1;
            }
        }
        f
    })
}

/// Central difference with step `h`.
pub fn central_difference(e: &Expr, x: f64, y: f64, dx: f64, dy: f64, h: f64) -> Option<f64> {
    let plus = e.eval_xy(x + h * dx, y + h * dy).ok()?;
    let minus = e.eval_xy(x - h * dx, y - h * dy).ok()?;
    Some((plus - minus) / (2.0 * h))
}
