use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};
use crate::expr::{coordinate_names, ExprVec};
use crate::geom::{norm, Point};

pub type PointFn = Arc<dyn Fn(&[f64]) -> Point + Send + Sync>;

/// Where a map's claimed constants come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    Analytic,
    Estimated,
    /// A plain homeomorphism: no constants claimed.
    None,
}

/// A germ of a map fixing the origin, with optional inverse and claimed
/// bi-Lipschitz constants `k1 <= k2` valid on the ball of `region_radius`.
#[derive(Clone)]
pub struct LipschitzMap {
    pub name: String,
    pub dim_in: usize,
    pub dim_out: usize,
    forward: PointFn,
    inverse: Option<PointFn>,
    pub constants: Option<(f64, f64)>,
    pub source: ConstantSource,
    pub region_radius: f64,
}

impl fmt::Debug for LipschitzMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LipschitzMap")
            .field("name", &self.name)
            .field("dim_in", &self.dim_in)
            .field("dim_out", &self.dim_out)
            .field("constants", &self.constants)
            .field("source", &self.source)
            .finish()
    }
}

const DEFAULT_REGION: f64 = 0.5;

impl LipschitzMap {
    pub fn new(
        name: impl Into<String>,
        dim_in: usize,
        dim_out: usize,
        forward: PointFn,
        inverse: Option<PointFn>,
        constants: Option<(f64, f64)>,
        source: ConstantSource,
    ) -> Self {
        LipschitzMap {
            name: name.into(),
            dim_in,
            dim_out,
            forward,
            inverse,
            constants,
            source,
            region_radius: DEFAULT_REGION,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Point {
        (self.forward)(x)
    }

    pub fn apply_inverse(&self, y: &[f64]) -> Option<Point> {
        self.inverse.as_ref().map(|g| g(y))
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn forward_fn(&self) -> PointFn {
        self.forward.clone()
    }

    pub fn inverse_fn(&self) -> Option<PointFn> {
        self.inverse.clone()
    }

    pub fn is_bi_lipschitz(&self) -> bool {
        self.constants.is_some()
    }

    pub fn identity(n: usize) -> Self {
        let id: PointFn = Arc::new(|x: &[f64]| x.to_vec());
        Self::new("identity", n, n, id.clone(), Some(id), Some((1.0, 1.0)), ConstantSource::Analytic)
    }

    /// `x -> M x`, constants from the extreme singular values.
    pub fn linear(name: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(GermError::Spec("linear map needs a square matrix".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let inv = m
            .clone()
            .try_inverse()
            .ok_or_else(|| GermError::Spec("linear map is singular".into()))?;
        let sv = m.clone().svd(false, false).singular_values;
        let (k1, k2) = (sv.min(), sv.max());
        let apply = |m: DMatrix<f64>| -> PointFn {
            Arc::new(move |x: &[f64]| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect())
        };
        Ok(Self::new(name, n, n, apply(m), Some(apply(inv)), Some((k1, k2)), ConstantSource::Analytic))
    }

    /// `x_{to} += k * x_{from}`.
    pub fn shear(n: usize, from: usize, to: usize, k: f64) -> Result<Self> {
        let mut rows = identity_rows(n);
        check_axes(n, from, to)?;
        rows[to][from] = k;
        Self::linear(format!("shear({from}->{to}, {k})"), &rows)
    }

    /// Rotation by `angle` in the `(i, j)` coordinate plane.
    pub fn rotation(n: usize, i: usize, j: usize, angle: f64) -> Result<Self> {
        check_axes(n, i, j)?;
        let mut rows = identity_rows(n);
        let (s, c) = angle.sin_cos();
        rows[i][i] = c;
        rows[i][j] = -s;
        rows[j][i] = s;
        rows[j][j] = c;
        Self::linear(format!("rotation({i},{j}, {angle})"), &rows)
    }

    pub fn scaling(n: usize, factor: f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = identity_rows(n)
            .into_iter()
            .map(|r| r.into_iter().map(|v| v * factor).collect())
            .collect();
        Self::linear(format!("scaling({factor})"), &rows)
    }

    /// `(x, y) -> (x, y + x sin ln|x|)`. The derivative is a shear by
    /// `s = sin ln x + cos ln x`, `|s| <= sqrt 2`, so the extreme singular
    /// values are `(sqrt(s^2 + 4) +- |s|) / 2` at `|s| = sqrt 2`.
    pub fn oscillation() -> Self {
        let wiggle = |x: f64| if x == 0.0 { 0.0 } else { x * x.abs().ln().sin() };
        let fwd: PointFn = Arc::new(move |p: &[f64]| vec![p[0], p[1] + wiggle(p[0])]);
        let inv: PointFn = Arc::new(move |p: &[f64]| vec![p[0], p[1] - wiggle(p[0])]);
        let r = 6f64.sqrt();
        let s = 2f64.sqrt();
        Self::new("oscillation", 2, 2, fwd, Some(inv), Some(((r - s) / 2.0, (r + s) / 2.0)), ConstantSource::Analytic)
    }

    /// `(x, y, z) -> (x, y, z^3)`: a homeomorphism whose inverse is not
    /// Lipschitz at the origin.
    pub fn cube_z() -> Self {
        let fwd: PointFn = Arc::new(|p: &[f64]| vec![p[0], p[1], p[2].powi(3)]);
        let inv: PointFn = Arc::new(|p: &[f64]| vec![p[0], p[1], p[2].cbrt()]);
        Self::new("cube_z", 3, 3, fwd, Some(inv), None, ConstantSource::None)
    }

    /// `x -> (1 + |x|) x`. Its derivative has eigenvalues `1 + |x|`
    /// (tangential) and `1 + 2|x|` (radial).
    pub fn radial(n: usize) -> Self {
        let fwd: PointFn = Arc::new(|p: &[f64]| {
            let s = 1.0 + norm(p);
            p.iter().map(|v| v * s).collect()
        });
        let inv: PointFn = Arc::new(|q: &[f64]| {
            let s = norm(q);
            if s == 0.0 {
                return q.to_vec();
            }
            let r = 2.0 * s / (1.0 + (1.0 + 4.0 * s).sqrt());
            q.iter().map(|v| v * r / s).collect()
        });
        Self::new(
            "radial",
            n,
            n,
            fwd,
            Some(inv),
            Some((1.0, 1.0 + 2.0 * DEFAULT_REGION)),
            ConstantSource::Analytic,
        )
    }

    /// Rotates the first two coordinates by the angle `kappa |p|`. The
    /// derivative is a rotation times `I + kappa u v^T` with `u` orthogonal to
    /// `v`, `|u| <= |p|`, `|v| = 1`, whose singular values are
    /// `sqrt(1 + m^2/4) +- m/2`, `m = kappa |p|`.
    pub fn twist(n: usize, kappa: f64) -> Result<Self> {
        if n < 2 {
            return Err(GermError::Param("twist needs dimension >= 2".into()));
        }
        let make = |sign: f64| -> PointFn {
            Arc::new(move |p: &[f64]| {
                let a = sign * kappa * norm(p);
                let (s, c) = a.sin_cos();
                let mut q = p.to_vec();
                q[0] = c * p[0] - s * p[1];
                q[1] = s * p[0] + c * p[1];
                q
            })
        };
        let m = kappa.abs() * DEFAULT_REGION;
        let root = (1.0 + m * m / 4.0).sqrt();
        Ok(Self::new(
            format!("twist({kappa})"),
            n,
            n,
            make(1.0),
            Some(make(-1.0)),
            Some((root - m / 2.0, root + m / 2.0)),
            ConstantSource::Analytic,
        ))
    }

    /// `x_2 += x_1^2`; on the ball of radius 1/2 the derivative is a shear
    /// by at most 1, with singular values `(sqrt 5 +- 1) / 2`.
    pub fn poly_shear(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(GermError::Param("poly_shear needs dimension >= 2".into()));
        }
        let fwd: PointFn = Arc::new(|p: &[f64]| {
            let mut q = p.to_vec();
            q[1] += p[0] * p[0];
            q
        });
        let inv: PointFn = Arc::new(|p: &[f64]| {
            let mut q = p.to_vec();
            q[1] -= p[0] * p[0];
            q
        });
        let r = 5f64.sqrt();
        Ok(Self::new(
            "poly_shear",
            n,
            n,
            fwd,
            Some(inv),
            Some(((r - 1.0) / 2.0, (r + 1.0) / 2.0)),
            ConstantSource::Analytic,
        ))
    }

    /// A map written as coordinate expressions in `x, y, z, ...`.
    pub fn from_exprs<S: AsRef<str>>(
        name: impl Into<String>,
        dim: usize,
        forward: &[S],
        inverse: Option<&[S]>,
        constants: Option<(f64, f64)>,
    ) -> Result<Self> {
        let names = coordinate_names(dim);
        let vars: Vec<&str> = names.iter().map(String::as_str).collect();
        let f = ExprVec::parse(forward, &vars)?;
        if f.len() != dim {
            return Err(GermError::Dimension { expected: dim, got: f.len() });
        }
        let inv = match inverse {
            Some(src) => {
                let g = ExprVec::parse(src, &vars)?;
                if g.len() != dim {
                    return Err(GermError::Dimension { expected: dim, got: g.len() });
                }
                Some(Arc::new(move |p: &[f64]| g.eval(p)) as PointFn)
            }
            None => None,
        };
        if let Some((k1, k2)) = constants {
            if !(k1 > 0.0 && k1 <= k2 && k2.is_finite()) {
                return Err(GermError::Param(format!("constants need 0 < k1 <= k2, got ({k1}, {k2})")));
            }
        }
        let source = if constants.is_some() { ConstantSource::Analytic } else { ConstantSource::None };
        Ok(Self::new(name, dim, dim, Arc::new(move |p: &[f64]| f.eval(p)), inv, constants, source))
    }

    /// `self ∘ inner`; constants multiply.
    pub fn compose(&self, inner: &LipschitzMap) -> Result<Self> {
        if inner.dim_out != self.dim_in {
            return Err(GermError::Dimension { expected: self.dim_in, got: inner.dim_out });
        }
        let (f, g) = (self.forward.clone(), inner.forward.clone());
        let fwd: PointFn = Arc::new(move |x: &[f64]| f(&g(x)));
        let inv = match (&self.inverse, &inner.inverse) {
            (Some(fi), Some(gi)) => {
                let (fi, gi) = (fi.clone(), gi.clone());
                Some(Arc::new(move |y: &[f64]| gi(&fi(y))) as PointFn)
            }
            _ => None,
        };
        let constants = match (self.constants, inner.constants) {
            (Some((a1, a2)), Some((b1, b2))) => Some((a1 * b1, a2 * b2)),
            _ => None,
        };
        let source = if constants.is_some() { ConstantSource::Analytic } else { ConstantSource::None };
        let mut m = Self::new(format!("{}∘{}", self.name, inner.name), inner.dim_in, self.dim_out, fwd, inv, constants, source);
        m.region_radius = self.region_radius.min(inner.region_radius);
        Ok(m)
    }

    /// The inverse as a map in its own right.
    pub fn inverted(&self) -> Option<Self> {
        let inv = self.inverse.clone()?;
        let mut m = Self::new(
            format!("{}^-1", self.name),
            self.dim_out,
            self.dim_in,
            inv,
            Some(self.forward.clone()),
            self.constants.map(|(k1, k2)| (1.0 / k2, 1.0 / k1)),
            self.source,
        );
        m.region_radius = self.region_radius;
        Some(m)
    }
}

fn identity_rows(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn check_axes(n: usize, i: usize, j: usize) -> Result<()> {
    if i >= n || j >= n || i == j {
        return Err(GermError::Param(format!("axes ({i}, {j}) invalid in dimension {n}")));
    }
    Ok(())
}
