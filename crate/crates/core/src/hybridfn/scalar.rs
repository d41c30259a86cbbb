//! Scalar bodies of function atoms: rationals, parameters, the variable `x`,
//! and `+ - * /`.

use std::fmt;

use num_traits::Zero;

use crate::error::{HybridError, Result};
use crate::point::{fmt_rational, parse_rational, Rational};
use crate::regions::Valuation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScalarExpr {
    Const(Rational),
    Param(String),
    X,
    Neg(Box<ScalarExpr>),
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Div(Box<ScalarExpr>, Box<ScalarExpr>),
}

impl ScalarExpr {
    pub fn constant(c: Rational) -> Self {
        ScalarExpr::Const(c)
    }

    /// Evaluates at `x`. `Ok(None)` is the undefined value (division by
    /// zero); a missing parameter is an error.
    pub fn eval(&self, x: &Rational, v: &Valuation) -> Result<Option<Rational>> {
        use ScalarExpr::*;
        let bin = |a: &ScalarExpr, b: &ScalarExpr| -> Result<Option<(Rational, Rational)>> {
            Ok(match (a.eval(x, v)?, b.eval(x, v)?) {
                (Some(a), Some(b)) => Some((a, b)),
                _ => None,
            })
        };
        Ok(match self {
            Const(c) => Some(c.clone()),
            Param(p) => Some(v.get(p)?),
            X => Some(x.clone()),
            Neg(a) => a.eval(x, v)?.map(|a| -a),
            Add(a, b) => bin(a, b)?.map(|(a, b)| a + b),
            Sub(a, b) => bin(a, b)?.map(|(a, b)| a - b),
            Mul(a, b) => bin(a, b)?.map(|(a, b)| a * b),
            Div(a, b) => bin(a, b)?.and_then(|(a, b)| (!b.is_zero()).then(|| a / b)),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser { src: text, pos: 0 };
        let e = p.sum()?;
        p.skip_ws();
        if p.pos != text.len() {
            return Err(p.err("unexpected input"));
        }
        Ok(e)
    }

    fn precedence(&self) -> u8 {
        match self {
            ScalarExpr::Add(..) | ScalarExpr::Sub(..) => 1,
            ScalarExpr::Mul(..) | ScalarExpr::Div(..) => 2,
            ScalarExpr::Neg(_) => 3,
            ScalarExpr::Const(c) if *c < Rational::zero() || !c.is_integer() => 2,
            _ => 4,
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScalarExpr::*;
        let wrap = |f: &mut fmt::Formatter<'_>, e: &ScalarExpr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Const(c) => f.write_str(&fmt_rational(c)),
            Param(p) => f.write_str(p),
            X => f.write_str("x"),
            Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, 4)
            }
            Add(a, b) => {
                wrap(f, a, 1)?;
                f.write_str(" + ")?;
                wrap(f, b, 2)
            }
            Sub(a, b) => {
                wrap(f, a, 1)?;
                f.write_str(" - ")?;
                wrap(f, b, 2)
            }
            Mul(a, b) => {
                wrap(f, a, 2)?;
                f.write_str("*")?;
                wrap(f, b, 3)
            }
            Div(a, b) => {
                wrap(f, a, 2)?;
                f.write_str("/")?;
                wrap(f, b, 3)
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn err(&self, msg: &str) -> HybridError {
        HybridError::Parse(format!("{msg} at offset {} in `{}`", self.pos, self.src))
    }

    fn sum(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    acc = ScalarExpr::Add(Box::new(acc), Box::new(self.product()?));
                }
                Some('-') => {
                    self.pos += 1;
                    acc = ScalarExpr::Sub(Box::new(acc), Box::new(self.product()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<ScalarExpr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = ScalarExpr::Mul(Box::new(acc), Box::new(self.unary()?));
                }
                Some('/') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = match (acc, rhs) {
                        (ScalarExpr::Const(a), ScalarExpr::Const(b)) if !b.is_zero() => ScalarExpr::Const(a / b),
                        (a, b) => ScalarExpr::Div(Box::new(a), Box::new(b)),
                    };
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarExpr> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(match self.unary()? {
                ScalarExpr::Const(c) => ScalarExpr::Const(-c),
                e => ScalarExpr::Neg(Box::new(e)),
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ScalarExpr> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                Ok(ScalarExpr::Const(parse_rational(&self.src[start..self.pos])?))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.src[self.pos..].starts_with(|c: char| c.is_alphanumeric() || c == '_') {
                    self.pos += self.src[self.pos..].chars().next().unwrap().len_utf8();
                }
                let name = &self.src[start..self.pos];
                Ok(if name == "x" {
                    ScalarExpr::X
                } else {
                    ScalarExpr::Param(name.to_string())
                })
            }
            _ => Err(self.err("expected number, parameter or `x`")),
        }
    }
}
