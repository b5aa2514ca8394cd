use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::PuiseuxError;
use crate::interval::IntervalSubset;
use crate::number::{Coeff, PuiseuxNumber};
use crate::order::{px_compare, PxOrdering};

/// Univariate polynomial in `x` whose coefficients are Puiseux numbers;
/// `coeffs[k]` multiplies `x^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PxPoly {
    coeffs: Vec<PuiseuxNumber>,
}

impl PxPoly {
    pub fn new(mut coeffs: Vec<PuiseuxNumber>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PxPoly { coeffs }
    }

    pub fn constant(c: PuiseuxNumber) -> Self {
        Self::new(vec![c])
    }

    /// `x`
    pub fn identity() -> Self {
        Self::new(vec![PuiseuxNumber::zero(), PuiseuxNumber::one()])
    }

    pub fn coeffs(&self) -> &[PuiseuxNumber] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &PuiseuxNumber) -> PuiseuxNumber {
        self.coeffs
            .iter()
            .rev()
            .fold(PuiseuxNumber::zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn add(&self, other: &PxPoly) -> PxPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = PuiseuxNumber::zero();
        PxPoly::new(
            (0..n)
                .map(|k| {
                    let a = self.coeffs.get(k).unwrap_or(&zero);
                    let b = other.coeffs.get(k).unwrap_or(&zero);
                    a + b
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &PxPoly) -> PxPoly {
        self.add(&other.scale(&Coeff::from_integer(BigInt::from(-1))))
    }

    pub fn scale(&self, q: &Coeff) -> PxPoly {
        PxPoly::new(self.coeffs.iter().map(|c| c.scale(q)).collect())
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> PxPoly {
        let mut out = vec![PuiseuxNumber::zero()];
        for (k, c) in self.coeffs.iter().enumerate() {
            out.push(c.scale(&Coeff::new(BigInt::one(), BigInt::from(k as u64 + 1))));
        }
        PxPoly::new(out)
    }

    /// `int_a^b p(x) dx`
    pub fn integrate(&self, a: &PuiseuxNumber, b: &PuiseuxNumber) -> PuiseuxNumber {
        let anti = self.antiderivative();
        &anti.eval(b) - &anti.eval(a)
    }
}

/// The planar cell `{(x1, x2) : a1 < x1 < b1, psi(x1) < x2 < phi(x1)}`.
#[derive(Debug, Clone)]
pub struct CellForm2D {
    pub a1: PuiseuxNumber,
    pub b1: PuiseuxNumber,
    pub psi: PxPoly,
    pub phi: PxPoly,
}

fn half() -> Coeff {
    Coeff::new(BigInt::one(), BigInt::from(2))
}

impl CellForm2D {
    /// Validates `a1 < b1`, `psi < phi` at the midpoint and `psi <= phi` at
    /// the endpoints.
    pub fn new(
        a1: PuiseuxNumber,
        psi: PxPoly,
        b1: PuiseuxNumber,
        phi: PxPoly,
    ) -> Result<Self, PuiseuxError> {
        match px_compare(&a1, &b1) {
            PxOrdering::Less => {}
            PxOrdering::Indeterminate => return Err(PuiseuxError::Indeterminate),
            _ => {
                return Err(PuiseuxError::InvalidCell(format!(
                    "empty base interval ({a1}, {b1})"
                )))
            }
        }
        let mid = (&a1 + &b1).scale(&half());
        match px_compare(&psi.eval(&mid), &phi.eval(&mid)) {
            PxOrdering::Less => {}
            PxOrdering::Indeterminate => return Err(PuiseuxError::Indeterminate),
            _ => {
                return Err(PuiseuxError::InvalidCell(
                    "lower bound not below upper bound at midpoint".into(),
                ))
            }
        }
        for x in [&a1, &b1] {
            match px_compare(&psi.eval(x), &phi.eval(x)) {
                PxOrdering::Less | PxOrdering::Equal => {}
                PxOrdering::Indeterminate => return Err(PuiseuxError::Indeterminate),
                PxOrdering::Greater => {
                    return Err(PuiseuxError::InvalidCell(
                        "lower bound above upper bound at an endpoint".into(),
                    ))
                }
            }
        }
        Ok(CellForm2D { a1, b1, psi, phi })
    }

    /// Splits at an interior point `c` of `(a1, b1)`.
    pub fn split_at(&self, c: &PuiseuxNumber) -> Result<(CellForm2D, CellForm2D), PuiseuxError> {
        let left = CellForm2D::new(self.a1.clone(), self.psi.clone(), c.clone(), self.phi.clone())?;
        let right = CellForm2D::new(c.clone(), self.psi.clone(), self.b1.clone(), self.phi.clone())?;
        Ok((left, right))
    }

    /// `phi - psi` when it does not depend on `x1`.
    pub fn constant_gap(&self) -> Option<PuiseuxNumber> {
        let gap = self.phi.sub(&self.psi);
        match gap.degree() {
            None => Some(PuiseuxNumber::zero()),
            Some(0) => Some(gap.coeffs()[0].clone()),
            _ => None,
        }
    }
}

/// Volume of a planar cell: the closed interval from 0 to
/// `int_{a1}^{b1} (phi - psi) dx1`, computed exactly.
pub fn px_vol_cell(cell: &CellForm2D) -> Result<IntervalSubset, PuiseuxError> {
    let gap = cell.phi.sub(&cell.psi);
    IntervalSubset::closed(gap.integrate(&cell.a1, &cell.b1))
}

/// Outcome of rescaling a constant-width strip.
#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub half_width: PuiseuxNumber,
    pub factor: Coeff,
    pub vol_w: IntervalSubset,
    pub vol_cw: IntervalSubset,
    pub ratio: PuiseuxNumber,
    /// `ratio == factor` exactly.
    pub exact: bool,
}

/// Compares the volume of a strip of half-width `w` around its midline with
/// the strip of half-width `c * w`; for strips the ratio is exactly `c`.
pub fn px_vol_scaling_check(cell: &CellForm2D, c: &Coeff) -> Result<ScalingReport, PuiseuxError> {
    if c <= &Coeff::zero() {
        return Err(PuiseuxError::InvalidCell("scale factor must be positive".into()));
    }
    let gap = cell.constant_gap().ok_or(PuiseuxError::NotAStrip)?;
    let w = gap.scale(&half());
    let mid = cell.psi.add(&cell.phi).scale(&half());
    let cw = PxPoly::constant(w.scale(c));
    let scaled = CellForm2D::new(cell.a1.clone(), mid.sub(&cw), cell.b1.clone(), mid.add(&cw))?;
    let vol_w = px_vol_cell(cell)?;
    let vol_cw = px_vol_cell(&scaled)?;
    let ratio = vol_cw.right_end.checked_div(&vol_w.right_end)?;
    let exact = ratio == PuiseuxNumber::from_rational(c.clone());
    Ok(ScalingReport { half_width: w, factor: c.clone(), vol_w, vol_cw, ratio, exact })
}

/// Max-norm neighbourhood `{(x, y) : dist_max((x, y), graph) <= w}` of the
/// line `y = m x + q` over `(a1, b1)`, for slopes `|m| <= 1`. In the max
/// norm the distance to such a line is `|y - m x - q| / (1 + |m|)`, so the
/// neighbourhood is a vertical strip of half-width `w (1 + |m|)`.
pub fn max_norm_strip(
    a1: PuiseuxNumber,
    b1: PuiseuxNumber,
    m: &Coeff,
    q: PuiseuxNumber,
    w: &PuiseuxNumber,
) -> Result<CellForm2D, PuiseuxError> {
    use num_traits::Signed;
    if m.abs() > Coeff::one() {
        return Err(PuiseuxError::InvalidCell("slope must satisfy |m| <= 1".into()));
    }
    let line = PxPoly::new(vec![q, PuiseuxNumber::from_rational(m.clone())]);
    let hw = PxPoly::constant(w.scale(&(Coeff::one() + m.abs())));
    CellForm2D::new(a1, line.sub(&hw), b1, line.add(&hw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Coeff {
        Coeff::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn eps_strip_over_diagonal_has_volume_eps() {
        let eps = PuiseuxNumber::epsilon();
        let cell = CellForm2D::new(
            PuiseuxNumber::zero(),
            PxPoly::identity(),
            PuiseuxNumber::one(),
            PxPoly::identity().add(&PxPoly::constant(eps.clone())),
        )
        .unwrap();
        let v = px_vol_cell(&cell).unwrap();
        assert_eq!(v.right_end, eps);
        assert!(v.closed);
        assert!(v.right_end.is_exact());
    }

    #[test]
    fn unit_square_and_triangle() {
        let one = PuiseuxNumber::one();
        let zero = PuiseuxNumber::zero();
        let sq = CellForm2D::new(zero.clone(), PxPoly::constant(zero.clone()), one.clone(), PxPoly::constant(one.clone())).unwrap();
        assert_eq!(px_vol_cell(&sq).unwrap().right_end, one);
        let tri = CellForm2D::new(zero.clone(), PxPoly::constant(zero.clone()), one.clone(), PxPoly::identity()).unwrap();
        assert_eq!(px_vol_cell(&tri).unwrap().right_end, PuiseuxNumber::from_rational(rat(1, 2)));
    }

    #[test]
    fn inverted_bounds_rejected() {
        let one = PuiseuxNumber::one();
        let zero = PuiseuxNumber::zero();
        let err = CellForm2D::new(zero.clone(), PxPoly::constant(one.clone()), one.clone(), PxPoly::constant(zero.clone()));
        assert!(matches!(err, Err(PuiseuxError::InvalidCell(_))));
        let err = CellForm2D::new(one.clone(), PxPoly::constant(zero.clone()), zero, PxPoly::constant(one));
        assert!(matches!(err, Err(PuiseuxError::InvalidCell(_))));
    }

    #[test]
    fn strip_scaling_ratio_is_exact() {
        let eps = PuiseuxNumber::epsilon();
        for (w, c) in [(eps.clone(), rat(2, 1)), (&eps * &eps, rat(3, 1))] {
            let cell = CellForm2D::new(
                PuiseuxNumber::zero(),
                PxPoly::constant(-w.clone()),
                PuiseuxNumber::one(),
                PxPoly::constant(w.clone()),
            )
            .unwrap();
            let rep = px_vol_scaling_check(&cell, &c).unwrap();
            assert!(rep.exact, "ratio {} for c = {}", rep.ratio, c);
            assert_eq!(rep.vol_w.right_end, w.scale(&rat(2, 1)));
        }
    }

    #[test]
    fn non_strip_rejected() {
        let zero = PuiseuxNumber::zero();
        let tri = CellForm2D::new(zero.clone(), PxPoly::constant(zero), PuiseuxNumber::one(), PxPoly::identity()).unwrap();
        assert!(matches!(px_vol_scaling_check(&tri, &rat(2, 1)), Err(PuiseuxError::NotAStrip)));
    }

    #[test]
    fn diagonal_max_norm_strip_within_envelope() {
        // the max-norm neighbourhood of y = x is twice as tall as the
        // vertical strip of the same nominal width; the envelope is 2c
        let eps = PuiseuxNumber::epsilon();
        let zero = PuiseuxNumber::zero();
        let one = PuiseuxNumber::one();
        let vertical = CellForm2D::new(
            zero.clone(),
            PxPoly::identity().sub(&PxPoly::constant(eps.clone())),
            one.clone(),
            PxPoly::identity().add(&PxPoly::constant(eps.clone())),
        )
        .unwrap();
        for c in [rat(1, 1), rat(2, 1), rat(5, 2)] {
            let st = max_norm_strip(zero.clone(), one.clone(), &rat(1, 1), zero.clone(), &eps.scale(&c)).unwrap();
            let ratio = px_vol_cell(&st)
                .unwrap()
                .right_end
                .checked_div(&px_vol_cell(&vertical).unwrap().right_end)
                .unwrap();
            let envelope = PuiseuxNumber::from_rational(rat(2, 1) * &c);
            assert_eq!(ratio, envelope.clone());
            assert_ne!(px_compare(&ratio, &envelope), PxOrdering::Greater);
        }
        let flat = max_norm_strip(zero.clone(), one.clone(), &rat(0, 1), zero.clone(), &eps).unwrap();
        let r = px_vol_cell(&flat).unwrap().right_end.checked_div(&px_vol_cell(&vertical).unwrap().right_end).unwrap();
        assert_eq!(r, one);
        assert!(max_norm_strip(zero, one, &rat(3, 2), PuiseuxNumber::zero(), &eps).is_err());
    }
}
