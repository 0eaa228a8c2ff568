//! Small recursive-descent parser for polynomial and scalar expressions.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | "+" unary | power
//! power  := atom ("^" unary)?
//! atom   := number | name | name "(" expr ")" | "(" expr ")"
//! ```
//!
//! Numbers are exact decimals (`0.7`, `3`, `1e-3`); `a/b` with constant `b`
//! stays exact. `pi` and the functions `sin cos exp sqrt` are available only
//! for floating-point evaluation.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Signed, ToPrimitive, Zero};

use crate::chartkit::Chart;
use crate::scalar::{Coefficient, GaussianRational};
use crate::symcore::Polynomial;

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at column {}: {}", self.position + 1, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Function {
    fn lookup(name: &str) -> Option<Function> {
        Some(match name {
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "exp" => Function::Exp,
            "sqrt" => Function::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Function::Sin => x.sin(),
            Function::Cos => x.cos(),
            Function::Exp => x.exp(),
            Function::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(BigRational),
    Pi,
    Name(String),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Function, Box<Node>),
}

/// Parsed expression; positions are kept for error messages.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    root: Node,
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { position: self.pos, message: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            None => self.err("unexpected end of expression"),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                if let Some(func) = Function::lookup(name) {
                    if self.eat(b'(') {
                        let arg = self.expr()?;
                        if !self.eat(b')') {
                            return self.err("expected ')' after function argument");
                        }
                        return Ok(Node::Call(func, Box::new(arg)));
                    }
                }
                if name == "pi" {
                    return Ok(Node::Pi);
                }
                Ok(Node::Name(name.to_string()))
            }
            Some(c) => self.err(format!("unexpected character {:?}", c as char)),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let mut digits = String::new();
        let mut frac_len = 0i64;
        let mut seen_dot = false;
        while let Some(&c) = self.bytes.get(self.pos) {
            if c.is_ascii_digit() {
                digits.push(c as char);
                if seen_dot {
                    frac_len += 1;
                }
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits.is_empty() {
            self.pos = start;
            return self.err("malformed number");
        }
        let mut exp = 0i64;
        if matches!(self.bytes.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            let neg = match self.bytes.get(self.pos) {
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                Some(b'+') => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            let es = self.pos;
            while self.bytes.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            if es == self.pos {
                self.pos = save;
                return self.err("malformed exponent");
            }
            exp = self.src[es..self.pos].parse::<i64>().map_err(|_| ParseError { position: es, message: "exponent too large".into() })?;
            if neg {
                exp = -exp;
            }
        }
        let mantissa: BigInt = digits.parse().expect("digits");
        let shift = exp - frac_len;
        if shift.abs() > 400 {
            self.pos = start;
            return self.err("number out of range");
        }
        let ten = BigInt::from(10);
        let value = if shift >= 0 {
            BigRational::from_integer(mantissa * Pow::pow(&ten, shift as u32))
        } else {
            BigRational::new(mantissa, Pow::pow(&ten, (-shift) as u32))
        };
        Ok(Node::Num(value))
    }
}

impl Expression {
    pub fn parse(src: &str) -> Result<Self, ParseError> {
        let mut p = Parser { src, bytes: src.as_bytes(), pos: 0 };
        let root = p.expr()?;
        if p.peek().is_some() {
            return p.err("unexpected trailing input");
        }
        Ok(Expression { source: src.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Every identifier that is neither a function nor `pi`.
    pub fn names(&self) -> Vec<String> {
        fn walk(n: &Node, out: &mut Vec<String>) {
            match n {
                Node::Name(s) => {
                    if !out.contains(s) {
                        out.push(s.clone())
                    }
                }
                Node::Neg(a) | Node::Call(_, a) => walk(a, out),
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                    walk(a, out);
                    walk(b, out)
                }
                Node::Num(_) | Node::Pi => {}
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }

    /// Exact polynomial over the chart's variable names.
    pub fn to_polynomial(&self, chart: &Arc<Chart>) -> Result<Polynomial<GaussianRational>, ParseError> {
        self.poly(&self.root, chart)
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { position: 0, message: format!("{} in {:?}", msg.into(), self.source) })
    }

    fn poly(&self, n: &Node, chart: &Arc<Chart>) -> Result<Polynomial<GaussianRational>, ParseError> {
        type P = Polynomial<GaussianRational>;
        Ok(match n {
            Node::Num(r) => P::constant(chart, GaussianRational::new(r.clone(), BigRational::zero())),
            Node::Pi => return self.fail("pi is not exact"),
            Node::Name(s) => match chart.lookup(s) {
                Some(v) => P::var(chart, v),
                None => return self.fail(format!("unknown variable {s:?}")),
            },
            Node::Neg(a) => -&self.poly(a, chart)?,
            Node::Add(a, b) => &self.poly(a, chart)? + &self.poly(b, chart)?,
            Node::Sub(a, b) => &self.poly(a, chart)? - &self.poly(b, chart)?,
            Node::Mul(a, b) => &self.poly(a, chart)? * &self.poly(b, chart)?,
            Node::Div(a, b) => {
                let d = self.poly(b, chart)?;
                if !d.is_constant() {
                    return self.fail("division by a non-constant");
                }
                let inv = d.constant_term().inverse();
                match inv {
                    Some(inv) => self.poly(a, chart)?.scale(&inv),
                    None => return self.fail("division by zero"),
                }
            }
            Node::Pow(a, b) => {
                let e = self.poly(b, chart)?;
                let k = e.constant_term();
                let ok = e.is_constant() && k.im.is_zero() && k.re.is_integer() && !k.re.is_negative();
                let k = if ok { k.re.to_integer().to_u32() } else { None };
                match k {
                    Some(k) if k <= 64 => self.poly(a, chart)?.pow(k),
                    _ => return self.fail("exponent must be a small nonnegative integer"),
                }
            }
            Node::Call(..) => return self.fail("functions are not polynomial"),
        })
    }

    /// Floating-point value with variables bound by `lookup`.
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, ParseError> {
        self.num(&self.root, lookup)
    }

    /// Value of a closed expression such as `"2*pi/3"`.
    pub fn eval_constant(&self) -> Result<f64, ParseError> {
        self.eval(&|_| None)
    }

    fn num(&self, n: &Node, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, ParseError> {
        Ok(match n {
            Node::Num(r) => r.to_f64().unwrap_or(f64::NAN),
            Node::Pi => std::f64::consts::PI,
            Node::Name(s) => match lookup(s) {
                Some(v) => v,
                None => return self.fail(format!("unknown variable {s:?}")),
            },
            Node::Neg(a) => -self.num(a, lookup)?,
            Node::Add(a, b) => self.num(a, lookup)? + self.num(b, lookup)?,
            Node::Sub(a, b) => self.num(a, lookup)? - self.num(b, lookup)?,
            Node::Mul(a, b) => self.num(a, lookup)? * self.num(b, lookup)?,
            Node::Div(a, b) => self.num(a, lookup)? / self.num(b, lookup)?,
            Node::Pow(a, b) => {
                let base = self.num(a, lookup)?;
                let e = self.num(b, lookup)?;
                if e.fract() == 0.0 && e.abs() < 1024.0 {
                    base.powi(e as i32)
                } else {
                    base.powf(e)
                }
            }
            Node::Call(f, a) => f.apply(self.num(a, lookup)?),
        })
    }
}

/// Parses `src` straight into a polynomial on `chart`.
pub fn parse_polynomial(src: &str, chart: &Arc<Chart>) -> Result<Polynomial<GaussianRational>, ParseError> {
    Expression::parse(src)?.to_polynomial(chart)
}

/// Exact value of a closed rational expression.
pub fn parse_rational(src: &str) -> Result<GaussianRational, ParseError> {
    let chart = Chart::cartesian(1);
    let p = parse_polynomial(src, &chart)?;
    if !p.is_constant() {
        return Err(ParseError { position: 0, message: format!("{src:?} is not a constant") });
    }
    Ok(p.constant_term())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chartkit::{Coordinate, Var};
    use crate::scalar::gaussian;

    #[test]
    fn parses_polynomials_exactly() {
        let chart = Chart::new("t", vec![Coordinate::line("x"), Coordinate::line("y")]).unwrap();
        let p = parse_polynomial("0.7*t - x^2/2 + 3*(y + p_x)", &chart).unwrap();
        let t = Polynomial::var(&chart, Var::Time);
        let x = Polynomial::var(&chart, Var::Coord(0));
        let y = Polynomial::var(&chart, Var::Coord(1));
        let px = Polynomial::var(&chart, Var::Momentum(0));
        let expect = &(&t.scale(&gaussian((7, 10), (0, 1))) - &(&x * &x).scale(&gaussian((1, 2), (0, 1))))
            + &(&y + &px).scale(&gaussian((3, 1), (0, 1)));
        assert_eq!(p, expect);
        assert_eq!(parse_polynomial("-x^2", &chart).unwrap(), -&(&x * &x));
        assert_eq!(parse_polynomial("p_t", &chart).unwrap(), Polynomial::var(&chart, Var::TimeMomentum));
    }

    #[test]
    fn scientific_and_decimal_literals() {
        assert_eq!(parse_rational("1e-3").unwrap(), gaussian((1, 1000), (0, 1)));
        assert_eq!(parse_rational("2.5E2").unwrap(), gaussian((250, 1), (0, 1)));
        assert_eq!(parse_rational(".5").unwrap(), gaussian((1, 2), (0, 1)));
    }

    #[test]
    fn float_evaluation() {
        let e = Expression::parse("2*pi/3").unwrap();
        assert!((e.eval_constant().unwrap() - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-15);
        let v = Expression::parse("exp(-r) + r^0.5").unwrap();
        let got = v.eval(&|n| (n == "r").then_some(4.0)).unwrap();
        assert!((got - ((-4.0f64).exp() + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_positions() {
        let e = Expression::parse("1 + * x").unwrap_err();
        assert_eq!(e.position, 4);
        assert!(Expression::parse("(x").is_err());
        assert!(Expression::parse("x y").is_err());
        let chart = Chart::cartesian(1);
        assert!(parse_polynomial("q1/q1", &chart).is_err());
        assert!(parse_polynomial("z", &chart).is_err());
        assert!(parse_polynomial("q1^-1", &chart).is_err());
        assert!(parse_polynomial("sin(q1)", &chart).is_err());
        assert!(parse_polynomial("pi*q1", &chart).is_err());
    }
}
