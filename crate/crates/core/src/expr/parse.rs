//! Recursive-descent parser.
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := factor (("*" | "/") factor)*
//! factor   := "-" factor | power
//! power    := atom ("^" exponent)?
//! exponent := "-"* atom            (must not mention x or y)
//! atom     := number | "x" | "y" | "(" expr ")" | func "(" expr ")"
//! func     := "abs" | "exp" | "ln" | "sin" | "cos" | "sqrt"
//! ```
//!
//! Unary minus sits between `^` and `*`, so `-x^2` is `-(x^2)`.

use thiserror::Error;

use super::{BinaryOp, Expr, UnaryOp, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {position}: {message}")]
pub struct ParseError {
    /// Character index into the input (may equal the input length at end of input).
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // optional exponent part: e[+-]digits
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lexeme: String = chars[start..i].iter().collect();
                let value: f64 = lexeme
                    .parse()
                    .map_err(|_| ParseError::new(start, format!("malformed number `{lexeme}`")))?;
                if !value.is_finite() {
                    return Err(ParseError::new(start, format!("number `{lexeme}` overflows")));
                }
                out.push((Tok::Num(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                out.push((Tok::Ident(name), start));
                continue;
            }
            other => return Err(ParseError::new(start, format!("unknown token `{other}`"))),
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect_rparen(&mut self, open_at: usize) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(ParseError::new(
                self.offset(),
                format!("expected `)` to close `(` at position {open_at}"),
            )),
            None => Err(ParseError::new(
                self.end,
                format!("unbalanced parentheses: `(` at position {open_at} is never closed"),
            )),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinaryOp::Add,
                Some(Tok::Minus) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinaryOp::Mul,
                Some(Tok::Slash) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Expr::unary(UnaryOp::Neg, inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            let at = self.offset();
            let exponent = self.exponent()?;
            if !exponent.is_constant() {
                return Err(ParseError::new(at, format!("non-constant exponent `{exponent}`")));
            }
            let value = exponent
                .eval(0.0, 0.0)
                .map_err(|e| ParseError::new(at, format!("invalid exponent: {e}")))?;
            return Ok(Expr::pow(base, value));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            let inner = self.exponent()?;
            return Ok(Expr::unary(UnaryOp::Neg, inner));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" => Ok(Expr::Var(Var::X)),
                "y" => Ok(Expr::Var(Var::Y)),
                _ => {
                    let op = UnaryOp::from_func_name(&name)
                        .ok_or_else(|| ParseError::new(at, format!("unknown identifier `{name}`")))?;
                    let open_at = self.offset();
                    match self.bump() {
                        Some(Tok::LParen) => {}
                        _ => return Err(ParseError::new(open_at, format!("expected `(` after `{name}`"))),
                    }
                    let arg = self.expr()?;
                    self.expect_rparen(open_at)?;
                    Ok(Expr::unary(op, arg))
                }
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect_rparen(at)?;
                Ok(inner)
            }
            Some(Tok::RParen) => Err(ParseError::new(at, "unbalanced parentheses: unexpected `)`")),
            Some(tok) => Err(ParseError::new(at, format!("unexpected token {tok:?}"))),
            None => Err(ParseError::new(self.end, "unexpected end of input")),
        }
    }
}

/// Parses an expression in `x` and `y`.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let end = text.chars().count();
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError::new(0, "empty expression"));
    }
    let mut p = Parser { toks, pos: 0, end };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        let at = p.offset();
        let msg = match p.peek() {
            Some(Tok::RParen) => "unbalanced parentheses: unexpected `)`".to_string(),
            Some(t) => format!("unexpected trailing token {t:?}"),
            None => unreachable!(),
        };
        return Err(ParseError::new(at, msg));
    }
    Ok(e)
}
