//! Bivariate real expressions in `x` and `y`.
//!
//! An [`Expr`] is an immutable tree built by [`parse`] (or by hand) that can be
//! evaluated pointwise and differentiated symbolically. Exponents are always
//! constants, which keeps [`Expr::differentiate`] total on everything except
//! `abs`.

mod diff;
mod parse;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diff::DiffError;
pub use parse::{parse, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Abs,
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl UnaryOp {
    /// Function name as written in the grammar; `None` for negation.
    pub fn func_name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Abs => Some("abs"),
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Ln => Some("ln"),
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
            UnaryOp::Sqrt => Some("sqrt"),
        }
    }

    pub(crate) fn from_func_name(name: &str) -> Option<Self> {
        Some(match name {
            "abs" => UnaryOp::Abs,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
        }
    }
}

/// Expression tree. `Pow` carries its exponent as a plain number, so a
/// variable exponent cannot be represented.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
}

/// Evaluation failure, naming the sub-expression that left the real domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("logarithm of non-positive value {value} in `{node}`")]
    LogDomain { node: String, value: f64 },
    #[error("square root of negative value {value} in `{node}`")]
    SqrtDomain { node: String, value: f64 },
    #[error("division by zero in `{node}`")]
    DivisionByZero { node: String },
    #[error("non-finite result in `{node}`")]
    NonFinite { node: String },
}

impl Expr {
    pub fn constant(value: f64) -> Self {
        Expr::Const(value)
    }

    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn unary(op: UnaryOp, child: Expr) -> Self {
        Expr::Unary(op, Box::new(child))
    }

    pub fn binary(op: BinaryOp, left: Expr, right: Expr) -> Self {
        Expr::Binary(op, Box::new(left), Box::new(right))
    }

    pub fn pow(base: Expr, exponent: f64) -> Self {
        Expr::Pow(Box::new(base), exponent)
    }

    /// Evaluates the expression at `(x, y)`.
    ///
    /// Any step that leaves the reals (log of a non-positive number, a zero
    /// divisor, overflow to infinity, NaN) is reported as an error instead of
    /// being propagated as a value.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Const(c) => *c,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Unary(op, child) => {
                let v = child.eval(x, y)?;
                match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Abs => v.abs(),
                    UnaryOp::Exp => v.exp(),
                    UnaryOp::Ln => {
                        if v <= 0.0 {
                            return Err(EvalError::LogDomain {
                                node: self.to_string(),
                                value: v,
                            });
                        }
                        v.ln()
                    }
                    UnaryOp::Sin => v.sin(),
                    UnaryOp::Cos => v.cos(),
                    UnaryOp::Sqrt => {
                        if v < 0.0 {
                            return Err(EvalError::SqrtDomain {
                                node: self.to_string(),
                                value: v,
                            });
                        }
                        v.sqrt()
                    }
                }
            }
            Expr::Binary(op, l, r) => {
                let lv = l.eval(x, y)?;
                let rv = r.eval(x, y)?;
                match op {
                    BinaryOp::Add => lv + rv,
                    BinaryOp::Sub => lv - rv,
                    BinaryOp::Mul => lv * rv,
                    BinaryOp::Div => {
                        if rv == 0.0 {
                            return Err(EvalError::DivisionByZero { node: self.to_string() });
                        }
                        lv / rv
                    }
                }
            }
            Expr::Pow(base, e) => {
                let b = base.eval(x, y)?;
                if b == 0.0 && *e < 0.0 {
                    return Err(EvalError::DivisionByZero { node: self.to_string() });
                }
                b.powf(*e)
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite { node: self.to_string() })
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Unary(_, c) | Expr::Pow(c, _) => c.contains_var(v),
            Expr::Binary(_, l, r) => l.contains_var(v) || r.contains_var(v),
        }
    }

    pub fn is_constant(&self) -> bool {
        !self.contains_var(Var::X) && !self.contains_var(Var::Y)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, c) | Expr::Pow(c, _) => 1 + c.size(),
            Expr::Binary(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Unary(UnaryOp::Neg, _) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if *c < 0.0 || c.is_sign_negative() => 3,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

/// Minimal-parenthesis rendering that reparses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "-{}", -c)
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Unary(UnaryOp::Neg, c) => {
                f.write_str("-")?;
                write_child(f, c, c.precedence() < 3)
            }
            Expr::Unary(op, c) => {
                let name = op.func_name().expect("named function");
                write!(f, "{name}({c})")
            }
            Expr::Binary(op, l, r) => {
                let p = self.precedence();
                write_child(f, l, l.precedence() < p)?;
                write!(f, "{}", op.symbol())?;
                write_child(f, r, r.precedence() <= p)
            }
            Expr::Pow(base, e) => {
                write_child(f, base, base.precedence() < 5)?;
                if e.is_sign_negative() {
                    write!(f, "^(-{})", -e)
                } else {
                    write!(f, "^{e}")
                }
            }
        }
    }
}

/// Anything that can be evaluated at a point of the plane.
pub trait Bivariate {
    fn value(&self, x: f64, y: f64) -> Result<f64, EvalError>;
}

impl Bivariate for Expr {
    fn value(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        self.eval(x, y)
    }
}

impl<F> Bivariate for F
where
    F: Fn(f64, f64) -> Result<f64, EvalError>,
{
    fn value(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        self(x, y)
    }
}

/// `|inner|^q`, the quantity whose co-ordinate quasi-convexity the bounds assume.
#[derive(Debug, Clone, Copy)]
pub struct AbsPower<'a> {
    pub inner: &'a Expr,
    pub q: f64,
}

impl Bivariate for AbsPower<'_> {
    fn value(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        let v = self.inner.eval(x, y)?.abs();
        Ok(if self.q == 1.0 { v } else { v.powf(self.q) })
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn eval_product_at_half() {
        assert_eq!(p("x*y").eval(0.5, 0.5).unwrap(), 0.25);
    }

    #[test]
    fn eval_square_product_at_corner() {
        assert_eq!(p("x^2*y^2").eval(1.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn reciprocal_at_zero_is_domain_error() {
        let err = p("1/x").eval(0.0, 1.0).unwrap_err();
        assert_eq!(
            err,
            EvalError::DivisionByZero {
                node: "1/x".to_string()
            }
        );
    }

    #[test]
    fn log_and_sqrt_domains() {
        assert!(matches!(
            p("y + ln(x)").eval(-1.0, 0.0),
            Err(EvalError::LogDomain { ref node, .. }) if node == "ln(x)"
        ));
        assert!(matches!(
            p("sqrt(x-1)").eval(0.0, 0.0),
            Err(EvalError::SqrtDomain { .. })
        ));
        assert!(matches!(p("x^0.5").eval(-4.0, 0.0), Err(EvalError::NonFinite { .. })));
        assert!(matches!(
            p("exp(x)").eval(1000.0, 0.0),
            Err(EvalError::NonFinite { .. })
        ));
    }

    #[test]
    fn eval_is_bitwise_repeatable() {
        let e = p("exp(sin(x*y)) / (1 + cos(x)^2) - sqrt(abs(y))");
        let a = e.eval(0.3, -0.7).unwrap();
        let b = e.eval(0.3, -0.7).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn display_respects_precedence() {
        assert_eq!(p("-x^2").to_string(), "-x^2");
        assert_eq!(p("(-x)^2").to_string(), "(-x)^2");
        assert_eq!(p("x-(y-1)").to_string(), "x-(y-1)");
        assert_eq!(p("(x-y)-1").to_string(), "x-y-1");
        assert_eq!(p("x/(y*2)").to_string(), "x/(y*2)");
        assert_eq!(p("x^(-2)").to_string(), "x^(-2)");
        assert_eq!(p("(x^2)^3").to_string(), "(x^2)^3");
    }

    #[test]
    fn negative_constant_reparses_to_same_value() {
        let e = Expr::binary(BinaryOp::Mul, Expr::Const(-3.0), Expr::Var(Var::X));
        let back = p(&e.to_string());
        assert_eq!(back.eval(2.0, 0.0).unwrap(), -6.0);
    }
}
