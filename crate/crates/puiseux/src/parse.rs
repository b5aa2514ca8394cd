//! Text syntax for Puiseux literals, e.g. `3/2*t^(1/2) + t^2 - 5*t^(7/3)`.
//!
//! ```text
//! series   := ws sign? term (ws ('+' | '-') ws term)* ws
//! term     := coeff (ws '*' ws mono)? | mono
//! coeff    := digits ('/' digits)?
//! mono     := ('t' | 'eps' | 'ε') ('^' exponent)?
//! exponent := int | '(' int ('/' digits)? ')'
//! ```
//!
//! `Display` prints the same syntax, so printing and parsing round-trip.

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::PuiseuxError;
use crate::number::{Coeff, Exponent, PuiseuxNumber, DEFAULT_TRUNC_ORDER};

const MAX_EXPONENT_PART: i64 = 1 << 20;

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PuiseuxError> {
        Err(PuiseuxError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Result<&'a str, PuiseuxError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        Ok(&self.src[start..self.pos])
    }

    fn small_int(&mut self) -> Result<i64, PuiseuxError> {
        let neg = self.eat("-");
        let v = self.bounded_digits()?;
        Ok(if neg { -v } else { v })
    }

    /// Exponent parts are capped so that later exponent arithmetic cannot
    /// overflow `i64`.
    fn bounded_digits(&mut self) -> Result<i64, PuiseuxError> {
        let v: i64 = self.digits()?.parse().map_err(|_| PuiseuxError::ExponentOverflow)?;
        if v > MAX_EXPONENT_PART {
            return Err(PuiseuxError::ExponentOverflow);
        }
        Ok(v)
    }

    fn coeff(&mut self) -> Result<Coeff, PuiseuxError> {
        let n: BigInt = self.digits()?.parse().expect("ascii digits");
        if self.eat("/") {
            let d: BigInt = self.digits()?.parse().expect("ascii digits");
            if d.is_zero() {
                return self.err("zero denominator");
            }
            Ok(Coeff::new(n, d))
        } else {
            Ok(Coeff::from_integer(n))
        }
    }

    fn exponent(&mut self) -> Result<Exponent, PuiseuxError> {
        if self.eat("(") {
            self.skip_ws();
            let n = self.small_int()?;
            self.skip_ws();
            let e = if self.eat("/") {
                self.skip_ws();
                let d = self.bounded_digits()?;
                if d == 0 {
                    return self.err("zero denominator in exponent");
                }
                Exponent::new(n, d)
            } else {
                Exponent::from_integer(n)
            };
            self.skip_ws();
            if !self.eat(")") {
                return self.err("expected ')'");
            }
            Ok(e)
        } else {
            Ok(Exponent::from_integer(self.small_int()?))
        }
    }

    fn mono(&mut self) -> Result<Option<Exponent>, PuiseuxError> {
        if !(self.eat("eps") || self.eat("ε") || self.eat("t")) {
            return Ok(None);
        }
        self.skip_ws();
        if self.eat("^") {
            self.skip_ws();
            Ok(Some(self.exponent()?))
        } else {
            Ok(Some(Exponent::one()))
        }
    }

    fn term(&mut self) -> Result<(Exponent, Coeff), PuiseuxError> {
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            let c = self.coeff()?;
            self.skip_ws();
            if self.eat("*") {
                self.skip_ws();
                match self.mono()? {
                    Some(e) => Ok((e, c)),
                    None => self.err("expected 't' after '*'"),
                }
            } else {
                Ok((Exponent::zero(), c))
            }
        } else {
            match self.mono()? {
                Some(e) => Ok((e, Coeff::one())),
                None => self.err("expected a coefficient or 't'"),
            }
        }
    }
}

/// Parses a literal. The truncation order is the default, raised if needed
/// so that every written term is kept.
pub fn parse_puiseux(src: &str) -> Result<PuiseuxNumber, PuiseuxError> {
    let mut cur = Cursor { src, pos: 0 };
    let mut terms = Vec::new();
    cur.skip_ws();
    let mut sign = if cur.eat("-") { -1 } else { 1 };
    cur.skip_ws();
    loop {
        let (e, c) = cur.term()?;
        terms.push((e, if sign < 0 { -c } else { c }));
        cur.skip_ws();
        if cur.eat("+") {
            sign = 1;
        } else if cur.eat("-") {
            sign = -1;
        } else {
            break;
        }
        cur.skip_ws();
    }
    if cur.peek().is_some() {
        return cur.err("unexpected trailing input");
    }
    let max_e = terms.iter().map(|(e, _)| *e).max().unwrap_or_else(Exponent::zero);
    let order = Exponent::from_integer(DEFAULT_TRUNC_ORDER).max(max_e.floor() + Exponent::one());
    Ok(PuiseuxNumber::from_terms(terms, order))
}

impl FromStr for PuiseuxNumber {
    type Err = PuiseuxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_puiseux(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_literal() {
        let s = "3/2*t^(1/2) + t^2 - 5*t^(7/3)";
        let x: PuiseuxNumber = s.parse().unwrap();
        assert_eq!(x.terms().len(), 3);
        assert_eq!(x.to_string(), s);
    }

    #[test]
    fn aliases_and_signs() {
        let a: PuiseuxNumber = "-eps + 1".parse().unwrap();
        let b: PuiseuxNumber = "1 - t".parse().unwrap();
        assert_eq!(a, b);
        let c: PuiseuxNumber = "ε^(-1/2)".parse().unwrap();
        assert_eq!(c.to_string(), "t^(-1/2)");
        let d: PuiseuxNumber = "t^-2".parse().unwrap();
        assert_eq!(d.to_string(), "t^(-2)");
    }

    #[test]
    fn like_terms_merge() {
        let x: PuiseuxNumber = "t + t - 2*t".parse().unwrap();
        assert!(x.is_zero());
    }

    #[test]
    fn high_exponents_kept() {
        let x: PuiseuxNumber = "t^12".parse().unwrap();
        assert_eq!(x.to_string(), "t^12");
        assert!(x.is_exact());
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "t^", "3/0", "t^(1/0)", "1 +", "2**t", "t^(1/2", "x", "1 2", "t^99999999999999999999"] {
            assert!(parse_puiseux(bad).is_err(), "accepted {bad:?}");
        }
    }
}
