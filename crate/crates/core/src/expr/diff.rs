use thiserror::Error;

use super::{BinaryOp, Expr, UnaryOp, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("`{node}` is not differentiable with respect to {var}")]
    NonDifferentiable { node: String, var: Var },
}

// Builders with the obvious 0/1 folds so repeated differentiation stays small.

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if *c == 1.0)
}

fn add(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        _ if is_zero(&l) => r,
        _ if is_zero(&r) => l,
        (Expr::Const(a), Expr::Const(b)) => Expr::Const(a + b),
        _ => Expr::binary(BinaryOp::Add, l, r),
    }
}

fn sub(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        _ if is_zero(&r) => l,
        _ if is_zero(&l) => neg(r),
        (Expr::Const(a), Expr::Const(b)) => Expr::Const(a - b),
        _ => Expr::binary(BinaryOp::Sub, l, r),
    }
}

fn mul(l: Expr, r: Expr) -> Expr {
    match (&l, &r) {
        _ if is_zero(&l) || is_zero(&r) => Expr::Const(0.0),
        _ if is_one(&l) => r,
        _ if is_one(&r) => l,
        (Expr::Const(a), Expr::Const(b)) => Expr::Const(a * b),
        _ => Expr::binary(BinaryOp::Mul, l, r),
    }
}

fn div(l: Expr, r: Expr) -> Expr {
    if is_zero(&l) {
        return Expr::Const(0.0);
    }
    if is_one(&r) {
        return l;
    }
    Expr::binary(BinaryOp::Div, l, r)
}

fn neg(e: Expr) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Unary(UnaryOp::Neg, inner) => *inner,
        other => Expr::unary(UnaryOp::Neg, other),
    }
}

fn pow(base: Expr, exponent: f64) -> Expr {
    if exponent == 1.0 {
        base
    } else if exponent == 0.0 {
        Expr::Const(1.0)
    } else {
        Expr::pow(base, exponent)
    }
}

impl Expr {
    /// Exact partial derivative with respect to `var`.
    ///
    /// Sub-trees that do not mention `var` differentiate to zero, so an `abs`
    /// is only rejected when `var` occurs beneath it.
    pub fn differentiate(&self, var: Var) -> Result<Expr, DiffError> {
        if !self.contains_var(var) {
            return Ok(Expr::Const(0.0));
        }
        Ok(match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(v) => Expr::Const(if *v == var { 1.0 } else { 0.0 }),
            Expr::Binary(op, l, r) => {
                let dl = l.differentiate(var)?;
                let dr = r.differentiate(var)?;
                let (l, r) = ((**l).clone(), (**r).clone());
                match op {
                    BinaryOp::Add => add(dl, dr),
                    BinaryOp::Sub => sub(dl, dr),
                    BinaryOp::Mul => add(mul(dl, r), mul(l, dr)),
                    BinaryOp::Div => div(sub(mul(dl, r.clone()), mul(l, dr)), pow(r, 2.0)),
                }
            }
            Expr::Pow(base, e) => {
                let db = base.differentiate(var)?;
                mul(mul(Expr::Const(*e), pow((**base).clone(), e - 1.0)), db)
            }
            Expr::Unary(op, child) => {
                let du = child.differentiate(var)?;
                let u = (**child).clone();
                match op {
                    UnaryOp::Neg => neg(du),
                    UnaryOp::Abs => {
                        return Err(DiffError::NonDifferentiable {
                            node: self.to_string(),
                            var,
                        })
                    }
                    UnaryOp::Exp => mul(self.clone(), du),
                    UnaryOp::Ln => div(du, u),
                    UnaryOp::Sin => mul(Expr::unary(UnaryOp::Cos, u), du),
                    UnaryOp::Cos => mul(neg(Expr::unary(UnaryOp::Sin, u)), du),
                    UnaryOp::Sqrt => div(du, mul(Expr::Const(2.0), self.clone())),
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn derivative_of_y_in_x_is_zero() {
        assert_eq!(parse("y").unwrap().differentiate(Var::X).unwrap(), Expr::Const(0.0));
    }

    #[test]
    fn derivative_of_sum_in_y_is_one() {
        assert_eq!(parse("x+y").unwrap().differentiate(Var::Y).unwrap(), Expr::Const(1.0));
    }

    #[test]
    fn abs_rejected_only_on_path() {
        let e = parse("abs(x)*y").unwrap();
        let err = e.differentiate(Var::X).unwrap_err();
        assert_eq!(
            err,
            DiffError::NonDifferentiable {
                node: "abs(x)".into(),
                var: Var::X
            }
        );
        let d = e.differentiate(Var::Y).unwrap();
        assert_eq!(d.eval(-3.0, 0.0).unwrap(), 3.0);
    }

    #[test]
    fn elementary_rules_at_a_point() {
        let cases = [
            ("sin(x)", Var::X, 0.4f64.cos()),
            ("cos(x)", Var::X, -0.4f64.sin()),
            ("ln(x)", Var::X, 1.0 / 0.4),
            ("sqrt(x)", Var::X, 0.5 / 0.4f64.sqrt()),
            ("exp(2*x)", Var::X, 2.0 * 0.8f64.exp()),
            ("x/y", Var::Y, -0.4 / 0.49),
            ("x^(-1)", Var::X, -1.0 / 0.16),
            ("-x^3", Var::X, -3.0 * 0.16),
        ];
        for (text, var, expected) in cases {
            let d = parse(text).unwrap().differentiate(var).unwrap();
            let got = d.eval(0.4, 0.7).unwrap();
            assert!((got - expected).abs() < 1e-12, "{text}: {got} vs {expected}");
        }
    }
}
