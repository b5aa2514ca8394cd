//! A tiny arithmetic expression language for parametric germs, sequences
//! and maps in configuration files.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Functions: `sin cos ln exp abs sqrt pow(a, b)`; constants `pi` and `e`.

use std::fmt;

use crate::error::GermError;

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Ln,
    Exp,
    Abs,
    Sqrt,
}

impl Func {
    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "ln" => Func::Ln,
            "exp" => Func::Exp,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Ln => x.ln(),
            Func::Exp => x.exp(),
            Func::Abs => x.abs(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Parses `src`, resolving identifiers against `vars` (by position).
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr, GermError> {
        let mut p = Parser { src, pos: 0, vars, depth: 0 };
        let e = p.expr()?;
        p.ws();
        if p.pos != src.len() {
            return p.err("unexpected trailing input");
        }
        Ok(e)
    }

    pub fn eval(&self, vals: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => vals[*i],
            Expr::Neg(a) => -a.eval(vals),
            Expr::Add(a, b) => a.eval(vals) + b.eval(vals),
            Expr::Sub(a, b) => a.eval(vals) - b.eval(vals),
            Expr::Mul(a, b) => a.eval(vals) * b.eval(vals),
            Expr::Div(a, b) => a.eval(vals) / b.eval(vals),
            Expr::Pow(a, b) => {
                let (x, y) = (a.eval(vals), b.eval(vals));
                if y.fract() == 0.0 && y.abs() <= 64.0 {
                    x.powi(y as i32)
                } else {
                    x.powf(y)
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(vals)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(i) => write!(f, "${i}"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{func:?}({a})"),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    vars: &'a [&'a str],
    depth: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T, GermError> {
        Err(GermError::Expr { pos: self.pos, msg: msg.to_string() })
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn ws(&mut self) {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<(), GermError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("expression nested too deeply");
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, GermError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, GermError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                break;
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, GermError> {
        self.enter()?;
        let out = if self.eat(b'-') {
            Expr::Neg(Box::new(self.unary()?))
        } else {
            let base = self.atom()?;
            if self.eat(b'^') {
                Expr::Pow(Box::new(base), Box::new(self.unary()?))
            } else {
                base
            }
        };
        self.depth -= 1;
        Ok(out)
    }

    fn atom(&mut self) -> Result<Expr, GermError> {
        self.ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => self.err("unexpected character"),
            None => self.err("unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<Expr, GermError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < bytes.len() && (bytes[self.pos] == b'-' || bytes[self.pos] == b'+') {
                self.pos += 1;
            }
            let digits_start = self.pos;
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if digits_start == self.pos {
                // no exponent digits: leave the `e` unconsumed
                self.pos = save;
            }
        }
        match self.src[start..self.pos].parse::<f64>() {
            Ok(v) => Ok(Expr::Num(v)),
            Err(_) => {
                self.pos = start;
                self.err("malformed number")
            }
        }
    }

    fn ident(&mut self) -> Result<Expr, GermError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        if let Some(i) = self.vars.iter().position(|v| *v == name) {
            return Ok(Expr::Var(i));
        }
        match name {
            "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
            "e" => return Ok(Expr::Num(std::f64::consts::E)),
            _ => {}
        }
        if !self.eat(b'(') {
            self.pos = start;
            return self.err("unknown identifier");
        }
        let first = self.expr()?;
        let out = if name == "pow" {
            if !self.eat(b',') {
                return self.err("pow takes two arguments");
            }
            let second = self.expr()?;
            Expr::Pow(Box::new(first), Box::new(second))
        } else {
            match Func::from_name(name) {
                Some(f) => Expr::Call(f, Box::new(first)),
                None => {
                    self.pos = start;
                    return self.err("unknown function");
                }
            }
        };
        if !self.eat(b')') {
            return self.err("expected ')'");
        }
        Ok(out)
    }
}

/// A vector of expressions sharing one variable list, e.g. the components
/// of a parametric curve or of a map.
#[derive(Debug, Clone)]
pub struct ExprVec {
    pub sources: Vec<String>,
    exprs: Vec<Expr>,
}

impl ExprVec {
    pub fn parse<S: AsRef<str>>(sources: &[S], vars: &[&str]) -> Result<Self, GermError> {
        let exprs = sources
            .iter()
            .map(|s| Expr::parse(s.as_ref(), vars))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExprVec { sources: sources.iter().map(|s| s.as_ref().to_string()).collect(), exprs })
    }

    pub fn len(&self) -> usize {
        self.exprs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exprs.is_empty()
    }

    pub fn eval(&self, vals: &[f64]) -> Vec<f64> {
        self.exprs.iter().map(|e| e.eval(vals)).collect()
    }
}

/// Conventional coordinate names for an `n`-dimensional point.
pub fn coordinate_names(n: usize) -> Vec<String> {
    if n <= 4 {
        ["x", "y", "z", "w"][..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, vars: &[&str], vals: &[f64]) -> f64 {
        Expr::parse(s, vars).unwrap().eval(vals)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", &[], &[]), 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", &[], &[]), 512.0);
        assert_eq!(ev("-2 ^ 2", &[], &[]), -4.0);
        assert_eq!(ev("8 / 4 / 2", &[], &[]), 1.0);
        assert_eq!(ev("pow(2, 10)", &[], &[]), 1024.0);
    }

    #[test]
    fn oscillation_graph() {
        let x = 0.01f64;
        let v = ev("x * sin(ln(abs(x)))", &["x"], &[x]);
        assert!((v - x * x.ln().sin()).abs() < 1e-18);
    }

    #[test]
    fn flat_function() {
        let x = 0.5f64;
        let v = ev("exp(-1/x^2)", &["x"], &[x]);
        assert!((v - (-4.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn scientific_and_constants() {
        assert_eq!(ev("1e-3", &[], &[]), 1e-3);
        assert!((ev("2*e", &[], &[]) - 2.0 * std::f64::consts::E).abs() < 1e-15);
        assert!(Expr::parse("2e", &[]).is_err());
        assert!((ev("cos(pi)", &[], &[]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_positions() {
        for bad in ["", "1 +", "foo(1)", "q", "(1", "pow(1)", "1 2", "sin 1", "1..2"] {
            assert!(Expr::parse(bad, &["x"]).is_err(), "accepted {bad:?}");
        }
        let deep = "(".repeat(10_000) + "1" + &")".repeat(10_000);
        assert!(Expr::parse(&deep, &[]).is_err());
    }
}
