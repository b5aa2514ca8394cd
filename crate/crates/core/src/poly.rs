//! Sparse multivariate polynomials with `f64` coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};

/// One term `coeff * x_1^e_1 * ... * x_n^e_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial(pub f64, pub Vec<u32>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    terms: Vec<Monomial>,
}

impl Poly {
    pub fn new(terms: Vec<Monomial>) -> Self {
        Poly { terms }
    }

    /// Builds from `(coeff, exponents)` pairs.
    pub fn from_terms<I: IntoIterator<Item = (f64, Vec<u32>)>>(it: I) -> Self {
        Poly { terms: it.into_iter().map(|(c, e)| Monomial(c, e)).collect() }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn check_arity(&self, n: usize) -> Result<()> {
        for Monomial(c, e) in &self.terms {
            if e.len() != n {
                return Err(GermError::Dimension { expected: n, got: e.len() });
            }
            if !c.is_finite() {
                return Err(GermError::Spec("non-finite polynomial coefficient".into()));
            }
        }
        Ok(())
    }

    fn term_value(c: f64, e: &[u32], x: &[f64]) -> f64 {
        e.iter().zip(x).fold(c, |acc, (&k, &v)| acc * v.powi(k as i32))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|Monomial(c, e)| Self::term_value(*c, e, x)).sum()
    }

    /// Sum of absolute term values; the scale against which a residual is
    /// judged to be zero.
    pub fn magnitude(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|Monomial(c, e)| Self::term_value(*c, e, x).abs()).sum()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for Monomial(c, e) in &self.terms {
            for i in 0..x.len() {
                if e[i] == 0 {
                    continue;
                }
                let mut v = c * e[i] as f64;
                for (j, (&k, &xj)) in e.iter().zip(x).enumerate() {
                    let k = if j == i { k - 1 } else { k };
                    v *= xj.powi(k as i32);
                }
                g[i] += v;
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horn_polynomial() {
        // x^2 + y^2 - z^6
        let p = Poly::from_terms([(1.0, vec![2, 0, 0]), (1.0, vec![0, 2, 0]), (-1.0, vec![0, 0, 6])]);
        let t = 0.3f64;
        assert!(p.eval(&[t.powi(3), 0.0, t]).abs() < 1e-18);
        let g = p.gradient(&[1.0, 2.0, 1.0]);
        assert_eq!(g, vec![2.0, 4.0, -6.0]);
        assert_eq!(p.magnitude(&[1.0, 1.0, 1.0]), 3.0);
    }
}
