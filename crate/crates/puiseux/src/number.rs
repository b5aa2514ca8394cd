use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};

use crate::error::PuiseuxError;

/// Exponents of `t` are small rationals.
pub type Exponent = Rational64;
/// Coefficients are exact, arbitrary precision rationals.
pub type Coeff = BigRational;

/// Default truncation order: terms `t^e` with `e >= 8` are dropped.
pub const DEFAULT_TRUNC_ORDER: i64 = 8;

/// A truncated Puiseux series `sum c_i t^{e_i}` with rational exponents and
/// rational coefficients.
///
/// `t` is a positive infinitesimal: it is smaller than every positive
/// rational, so the sign of a series is the sign of its lowest-order
/// coefficient.
///
/// Terms with exponent at or above `trunc_order` are discarded by every
/// operation. When anything was discarded (or an input was already
/// inexact) `reliable_to` records the exponent from which the stored
/// terms can no longer be trusted; `None` means the value is exact.
#[derive(Clone, Debug)]
pub struct PuiseuxNumber {
    terms: Vec<(Exponent, Coeff)>,
    trunc_order: Exponent,
    reliable_to: Option<Exponent>,
}

impl PartialEq for PuiseuxNumber {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for PuiseuxNumber {}

fn min_opt(a: Option<Exponent>, b: Option<Exponent>) -> Option<Exponent> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl PuiseuxNumber {
    fn default_order() -> Exponent {
        Exponent::from_integer(DEFAULT_TRUNC_ORDER)
    }

    /// Builds a series from arbitrary `(exponent, coefficient)` pairs:
    /// like exponents are merged, zero coefficients removed and terms at or
    /// above `trunc_order` dropped (which marks the result inexact).
    pub fn from_terms<I>(terms: I, trunc_order: Exponent) -> Self
    where
        I: IntoIterator<Item = (Exponent, Coeff)>,
    {
        let mut raw: Vec<(Exponent, Coeff)> = terms.into_iter().collect();
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Exponent, Coeff)> = Vec::with_capacity(raw.len());
        for (e, c) in raw {
            match merged.last_mut() {
                Some((le, lc)) if *le == e => *lc += c,
                _ => merged.push((e, c)),
            }
        }
        let mut dropped = false;
        let terms: Vec<_> = merged
            .into_iter()
            .filter(|(e, c)| {
                if c.is_zero() {
                    return false;
                }
                if *e >= trunc_order {
                    dropped = true;
                    return false;
                }
                true
            })
            .collect();
        PuiseuxNumber {
            terms,
            trunc_order,
            reliable_to: if dropped { Some(trunc_order) } else { None },
        }
    }

    pub fn zero() -> Self {
        Self::from_terms(std::iter::empty(), Self::default_order())
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(Coeff::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(q: Coeff) -> Self {
        Self::from_terms([(Exponent::zero(), q)], Self::default_order())
    }

    /// `c * t^e` as an exact value.
    pub fn monomial(c: Coeff, e: Exponent) -> Self {
        let order = Self::default_order().max(e.floor() + Exponent::one());
        Self::from_terms([(e, c)], order)
    }

    /// The infinitesimal generator `epsilon = t`.
    pub fn epsilon() -> Self {
        Self::monomial(Coeff::one(), Exponent::one())
    }

    pub fn with_trunc_order(mut self, order: Exponent) -> Self {
        self.trunc_order = order;
        let dropped = self.terms.iter().any(|(e, _)| *e >= order);
        if dropped {
            self.terms.retain(|(e, _)| *e < order);
            self.reliable_to = min_opt(self.reliable_to, Some(order));
        }
        self
    }

    pub fn terms(&self) -> &[(Exponent, Coeff)] {
        &self.terms
    }

    pub fn trunc_order(&self) -> Exponent {
        self.trunc_order
    }

    /// Exponent from which stored terms are unreliable, `None` if exact.
    pub fn reliable_to(&self) -> Option<Exponent> {
        self.reliable_to
    }

    pub fn is_exact(&self) -> bool {
        self.reliable_to.is_none()
    }

    /// True when precision was lost below the requested truncation order.
    pub fn truncation_loss(&self) -> bool {
        matches!(self.reliable_to, Some(r) if r < self.trunc_order)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<Exponent> {
        self.terms.first().map(|(e, _)| *e)
    }

    pub fn leading_coefficient(&self) -> Option<&Coeff> {
        self.terms.first().map(|(_, c)| c)
    }

    /// Coefficient of `t^0`, the standard part when the valuation is >= 0.
    pub fn constant_term(&self) -> Coeff {
        self.terms
            .iter()
            .find(|(e, _)| e.is_zero())
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Coeff::zero)
    }

    /// Least common denominator of all exponents (the `p` in `t^{i/p}`).
    pub fn common_denominator(&self) -> i64 {
        self.terms
            .iter()
            .fold(1i64, |acc, (e, _)| acc.lcm(e.denom()))
    }

    /// Effective valuation used when propagating error orders: a known zero
    /// contributes no error, an inexact zero contributes its reliability.
    fn effective_valuation(&self) -> Option<Exponent> {
        self.valuation().or(self.reliable_to)
    }

    fn order_with(&self, other: &Self) -> Exponent {
        self.trunc_order.max(other.trunc_order)
    }

    pub fn signum(&self) -> i8 {
        match self.leading_coefficient() {
            None => 0,
            Some(c) if c.is_positive() => 1,
            Some(_) => -1,
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Multiplies by a rational constant.
    pub fn scale(&self, q: &Coeff) -> Self {
        let mut out = Self::from_terms(
            self.terms.iter().map(|(e, c)| (*e, c * q)),
            self.trunc_order,
        );
        out.reliable_to = if q.is_zero() { None } else { min_opt(out.reliable_to, self.reliable_to) };
        out
    }

    /// Multiplicative inverse, by a truncated geometric series on the unit
    /// part: `x = c t^e (1 + u)` gives `x^{-1} = c^{-1} t^{-e} sum (-u)^k`.
    pub fn inv(&self) -> Result<Self, PuiseuxError> {
        let Some((e, c)) = self.terms.first().cloned() else {
            return Err(PuiseuxError::DivisionByZero);
        };
        if let Some(r) = self.reliable_to {
            if e >= r {
                return Err(PuiseuxError::DivisionByZero);
            }
        }
        let order = self.trunc_order;
        let c_inv = c.recip();
        // u has strictly positive exponents
        let u: Vec<(Exponent, Coeff)> = self.terms[1..]
            .iter()
            .map(|(ei, ci)| (*ei - e, ci * &c_inv))
            .collect();
        // need unit-part terms with exponent < order + e so that the result,
        // shifted by -e, reaches exponents below order
        let rel_cut = order + e;
        let mut sum: Vec<(Exponent, Coeff)> = vec![(Exponent::zero(), Coeff::one())];
        let mut power: Vec<(Exponent, Coeff)> = vec![(Exponent::zero(), Coeff::one())];
        let mut series_cut = false;
        if !u.is_empty() {
            loop {
                let mut next: Vec<(Exponent, Coeff)> = Vec::new();
                for (pe, pc) in &power {
                    for (ue, uc) in &u {
                        let ex = *pe + *ue;
                        if ex < rel_cut {
                            next.push((ex, -(pc * uc)));
                        } else {
                            series_cut = true;
                        }
                    }
                }
                let next = Self::from_terms(next, rel_cut).terms;
                if next.is_empty() {
                    break;
                }
                sum.extend(next.iter().cloned());
                power = next;
            }
        }
        let mut out = Self::from_terms(
            sum.into_iter().map(|(ex, cx)| (ex - e, cx * &c_inv)),
            order,
        );
        let mut reliable = out.reliable_to;
        if series_cut {
            reliable = min_opt(reliable, Some(order));
        }
        if let Some(r) = self.reliable_to {
            reliable = min_opt(reliable, Some(r - e - e));
        }
        out.reliable_to = reliable;
        Ok(out)
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, PuiseuxError> {
        Ok(self * &rhs.inv()?)
    }

    /// Integer power (negative powers go through `inv`).
    pub fn powi(&self, n: i32) -> Result<Self, PuiseuxError> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one().with_trunc_order(self.trunc_order);
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Substitutes a positive real value for `t`. Only meaningful as a
    /// diagnostic: the result forgets infinitesimal ordering.
    pub fn eval_at(&self, t: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(e, c)| {
                let ef = *e.numer() as f64 / *e.denom() as f64;
                c.to_f64().unwrap_or(f64::NAN) * t.powf(ef)
            })
            .sum()
    }
}

impl Add for &PuiseuxNumber {
    type Output = PuiseuxNumber;
    fn add(self, rhs: &PuiseuxNumber) -> PuiseuxNumber {
        let order = self.order_with(rhs);
        let mut out = PuiseuxNumber::from_terms(
            self.terms.iter().chain(rhs.terms.iter()).cloned(),
            order,
        );
        out.reliable_to = min_opt(out.reliable_to, min_opt(self.reliable_to, rhs.reliable_to));
        out
    }
}

impl Sub for &PuiseuxNumber {
    type Output = PuiseuxNumber;
    fn sub(self, rhs: &PuiseuxNumber) -> PuiseuxNumber {
        self + &(-rhs.clone())
    }
}

impl Mul for &PuiseuxNumber {
    type Output = PuiseuxNumber;
    fn mul(self, rhs: &PuiseuxNumber) -> PuiseuxNumber {
        let order = self.order_with(rhs);
        let mut prod = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                prod.push((*ea + *eb, ca * cb));
            }
        }
        let mut out = PuiseuxNumber::from_terms(prod, order);
        let from_lhs = self
            .reliable_to
            .and_then(|r| rhs.effective_valuation().map(|v| r + v));
        let from_rhs = rhs
            .reliable_to
            .and_then(|r| self.effective_valuation().map(|v| r + v));
        out.reliable_to = min_opt(out.reliable_to, min_opt(from_lhs, from_rhs));
        out
    }
}

impl Neg for PuiseuxNumber {
    type Output = PuiseuxNumber;
    fn neg(mut self) -> PuiseuxNumber {
        for (_, c) in &mut self.terms {
            *c = -c.clone();
        }
        self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for PuiseuxNumber {
            type Output = PuiseuxNumber;
            fn $m(self, rhs: PuiseuxNumber) -> PuiseuxNumber {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

fn fmt_exponent(e: &Exponent) -> String {
    if e.is_integer() && !e.is_negative() {
        format!("{}", e.numer())
    } else {
        format!("({})", e)
    }
}

impl fmt::Display for PuiseuxNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            if e.is_zero() {
                write!(f, "{}", mag)?;
                continue;
            }
            if !mag.is_one() {
                write!(f, "{}*", mag)?;
            }
            if e.is_one() {
                write!(f, "t")?;
            } else {
                write!(f, "t^{}", fmt_exponent(e))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Coeff {
        Coeff::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn one_plus_eps_plus_one_minus_eps() {
        let eps = PuiseuxNumber::epsilon();
        let one = PuiseuxNumber::one();
        let s = &(&one + &eps) + &(&one - &eps);
        assert_eq!(s, PuiseuxNumber::from_integer(2));
        assert!(s.is_exact());
    }

    #[test]
    fn eps_squared() {
        let eps = PuiseuxNumber::epsilon();
        let sq = &eps * &eps;
        assert_eq!(sq.terms(), &[(Exponent::from_integer(2), Coeff::one())]);
    }

    #[test]
    fn inverse_of_one_minus_eps_is_geometric() {
        let x = &PuiseuxNumber::one() - &PuiseuxNumber::epsilon();
        let inv = x.inv().unwrap();
        let expected: Vec<_> = (0..DEFAULT_TRUNC_ORDER)
            .map(|k| (Exponent::from_integer(k), Coeff::one()))
            .collect();
        assert_eq!(inv.terms(), expected.as_slice());
        assert!(!inv.is_exact());
        let back = &inv * &x;
        assert_eq!(back, PuiseuxNumber::one());
    }

    #[test]
    fn inverse_of_monomial_is_exact() {
        let x = PuiseuxNumber::monomial(q(3, 2), Exponent::new(1, 2));
        let inv = x.inv().unwrap();
        assert!(inv.is_exact());
        assert_eq!(inv.terms(), &[(Exponent::new(-1, 2), q(2, 3))]);
    }

    #[test]
    fn zero_has_no_inverse() {
        assert!(matches!(
            PuiseuxNumber::zero().inv(),
            Err(PuiseuxError::DivisionByZero)
        ));
    }

    #[test]
    fn display_format() {
        let x = PuiseuxNumber::from_terms(
            [
                (Exponent::new(1, 2), q(3, 2)),
                (Exponent::from_integer(2), q(1, 1)),
                (Exponent::new(7, 3), q(-5, 1)),
            ],
            Exponent::from_integer(8),
        );
        assert_eq!(x.to_string(), "3/2*t^(1/2) + t^2 - 5*t^(7/3)");
        assert_eq!(x.common_denominator(), 6);
        assert_eq!(PuiseuxNumber::zero().to_string(), "0");
        assert_eq!((-PuiseuxNumber::epsilon()).to_string(), "-t");
    }

    #[test]
    fn inexact_inverse_loses_precision() {
        // (t + t^8) truncated at 8 is t, known only to O(t^8)
        let x = PuiseuxNumber::from_terms(
            [
                (Exponent::one(), Coeff::one()),
                (Exponent::from_integer(8), Coeff::one()),
            ],
            Exponent::from_integer(8),
        );
        assert_eq!(x.reliable_to(), Some(Exponent::from_integer(8)));
        let inv = x.inv().unwrap();
        // relative error t^7, so 1/x is reliable to t^{-1+7} = t^6
        assert_eq!(inv.reliable_to(), Some(Exponent::from_integer(6)));
        assert!(inv.truncation_loss());
    }
}
