use super::{simplify, Expr, Func, Var};

pub(crate) fn diff(e: &Expr, v: Var) -> Expr {
    simplify(&raw(e, v))
}

fn raw(e: &Expr, v: Var) -> Expr {
    if !e.depends_on(v) {
        return Expr::zero();
    }
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(w) => Expr::constant(if *w == v { 1.0 } else { 0.0 }),
        Expr::Neg(a) => raw(a, v).neg(),
        Expr::Add(a, b) => raw(a, v).add(raw(b, v)),
        Expr::Sub(a, b) => raw(a, v).sub(raw(b, v)),
        Expr::Mul(a, b) => raw(a, v)
            .mul((**b).clone())
            .add((**a).clone().mul(raw(b, v))),
        Expr::Div(a, b) => {
            // (a'b - ab') / b^2
            let num = raw(a, v)
                .mul((**b).clone())
                .sub((**a).clone().mul(raw(b, v)));
            num.div((**b).clone().powi(2))
        }
        Expr::Pow(base, exponent) => {
            let b = (**base).clone();
            let n = (**exponent).clone();
            if !exponent.depends_on(v) {
                // n * b^(n-1) * b'
                let lowered = match n.as_const() {
                    Some(c) => Expr::constant(c - 1.0),
                    None => n.clone().sub(Expr::one()),
                };
                n.mul(b.pow(lowered)).mul(raw(base, v))
            } else if !base.depends_on(v) {
                // b^n * log(b) * n'
                e.clone().mul(b.log()).mul(raw(exponent, v))
            } else {
                // b^n * (n' log b + n b'/b)
                let inner = raw(exponent, v)
                    .mul(b.clone().log())
                    .add(n.mul(raw(base, v)).div(b));
                e.clone().mul(inner)
            }
        }
        Expr::Call(func, a) => {
            let inner = raw(a, v);
            let a = (**a).clone();
            let outer = match func {
                Func::Sin => a.cos(),
                Func::Cos => a.sin().neg(),
                Func::Exp => a.exp(),
                Func::Log => Expr::one().div(a),
                Func::Atan => Expr::one().div(Expr::one().add(a.powi(2))),
                Func::Sqrt => Expr::constant(0.5).div(a.sqrt()),
            };
            outer.mul(inner)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn d(text: &str, v: Var) -> Expr {
        parse(text).unwrap().diff(v)
    }

    #[test]
    fn closedness_partials_of_exact_example() {
        assert_eq!(d("2*x*y+1", Var::Y), parse("2*x").unwrap());
        assert_eq!(d("x^2+cos(y)", Var::X), parse("2*x").unwrap());
    }

    #[test]
    fn quotient_rule_matches_hand_derivative() {
        let got = d("x/(x^2+y^2)", Var::Y);
        let want = parse("-2*x*y/(x^2+y^2)^2").unwrap();
        for &(x, y) in &[(1.0, 0.5), (-0.3, 1.7), (2.0, -1.0)] {
            let (g, w) = (got.eval_xy(x, y).unwrap(), want.eval_xy(x, y).unwrap());
            assert!((g - w).abs() <= 1e-14 * (1.0 + w.abs()), "{g} vs {w}");
        }
    }

    #[test]
    fn function_rules() {
        let cases = [
            ("sin(x)", "cos(x)"),
            ("cos(2*x)", "-2*sin(2*x)"),
            ("exp(x*y)", "y*exp(x*y)"),
            ("log(x)", "1/x"),
            ("atan(x)", "1/(1+x^2)"),
            ("sqrt(x)", "0.5/sqrt(x)"),
            ("x^y", "y*x^(y-1)"),
            ("2^x", "2^x*log(2)"),
        ];
        for (f, df) in cases {
            let got = d(f, Var::X);
            let want = parse(df).unwrap();
            for &(x, y) in &[(0.7, 1.3), (1.9, -0.4)] {
                let (g, w) = (got.eval_xy(x, y).unwrap(), want.eval_xy(x, y).unwrap());
                assert!((g - w).abs() <= 1e-13 * (1.0 + w.abs()), "{f}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn independent_subtrees_vanish() {
        assert!(d("sin(y)*y^3", Var::X).is_zero());
    }
}
