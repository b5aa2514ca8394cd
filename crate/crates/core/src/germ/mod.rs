//! Set-germs at the origin: a membership test, a shell sampler and a
//! distance estimator, with exact nearest-point oracles where available.

mod distance;
mod sample;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use distance::{Budget, DistanceBound};
pub use sample::project_to_zero_set;

use crate::error::{GermError, Result};
use crate::geom::{dist, dot, norm, normalize, Point};
use crate::lipschitz::LipschitzMap;
use crate::poly::Poly;

pub type NearestFn = Arc<dyn Fn(&[f64]) -> Point + Send + Sync>;
pub type CurveFn = Arc<dyn Fn(f64) -> Point + Send + Sync>;
pub type TermFn = Arc<dyn Fn(u64) -> Point + Send + Sync>;

/// Relative tolerance for polynomial equations: `|p(x)| <= tol * sum |terms|`.
pub const EQUATION_TOL: f64 = 1e-10;

/// Geometric shell radii `r0 * ratio^j`, `j = 0..shells`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub r0: f64,
    pub ratio: f64,
    pub shells: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { r0: 0.1, ratio: 0.5, shells: 12 }
    }
}

impl Schedule {
    pub fn new(r0: f64, ratio: f64, shells: usize) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite() && ratio > 0.0 && ratio < 1.0 && shells > 0) {
            return Err(GermError::Param(format!(
                "schedule needs r0 > 0, 0 < ratio < 1, shells > 0 (got {r0}, {ratio}, {shells})"
            )));
        }
        Ok(Schedule { r0, ratio, shells })
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.shells).map(|j| self.r0 * self.ratio.powi(j as i32)).collect()
    }

    /// The `k` smallest radii, coarse to fine.
    pub fn finest(&self, k: usize) -> Vec<f64> {
        let r = self.radii();
        r[r.len().saturating_sub(k)..].to_vec()
    }
}

/// One branch `u -> curve(u)`, `u` in `(0, u_max]`, tending to 0 as `u -> 0`
/// with norm increasing in `u`.
#[derive(Clone)]
pub struct Branch {
    pub curve: CurveFn,
    pub u_max: f64,
}

#[derive(Clone)]
pub enum GermKind {
    /// The whole ambient space.
    Whole,
    /// A linear subspace with orthonormal basis.
    Subspace { basis: Vec<Point> },
    /// Common zeros of `equations` where every inequality is `>= 0`.
    Algebraic { equations: Vec<Poly>, inequalities: Vec<Poly> },
    Parametric { branches: Vec<Branch> },
    /// `m -> term(m)`, `m >= 1`, norms eventually decreasing to 0.
    Sequence { term: TermFn, max_index: u64 },
    /// Union of rays through unit `generators` and of the flat sectors
    /// spanned by `edges`; membership within angle `eta`.
    Cone { generators: Vec<Point>, edges: Vec<(usize, usize)>, eta: f64 },
    /// Points whose norm lies in one of the closed `bands`.
    RadialBands { bands: Vec<(f64, f64)> },
    Mapped { base: Arc<GermSet>, map: Arc<LipschitzMap> },
    Union { parts: Vec<GermSet> },
}

#[derive(Clone)]
pub struct GermSet {
    pub name: String,
    pub dim: usize,
    kind: GermKind,
    nearest: Option<NearestFn>,
}

impl fmt::Debug for GermSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GermSet")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("kind", &self.kind_name())
            .field("exact_distance", &self.has_exact_distance())
            .finish()
    }
}

impl GermSet {
    fn build(name: impl Into<String>, dim: usize, kind: GermKind) -> Self {
        GermSet { name: name.into(), dim, kind, nearest: None }
    }

    pub fn whole(dim: usize) -> Self {
        Self::build(format!("R^{dim}"), dim, GermKind::Whole)
    }

    /// The span of `vectors` (orthonormalized).
    pub fn subspace(name: impl Into<String>, dim: usize, vectors: &[Point]) -> Result<Self> {
        let mut basis: Vec<Point> = Vec::new();
        for v in vectors {
            if v.len() != dim {
                return Err(GermError::Dimension { expected: dim, got: v.len() });
            }
            let mut w = v.clone();
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
            match normalize(&w) {
                Some(u) if norm(&w) > 1e-12 * norm(v).max(1e-300) => basis.push(u),
                _ => return Err(GermError::Spec("subspace vectors are linearly dependent".into())),
            }
        }
        if basis.is_empty() {
            return Err(GermError::Spec("subspace needs at least one vector".into()));
        }
        Ok(Self::build(name, dim, GermKind::Subspace { basis }))
    }

    /// Coordinate axis `i` as a line.
    pub fn axis(dim: usize, i: usize) -> Self {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        let name = ["x", "y", "z", "w"].get(i).map_or(format!("axis{i}"), |s| format!("{s}-axis"));
        Self::subspace(name, dim, &[e]).expect("unit vector")
    }

    /// The coordinate hyperplane `x_i = 0`.
    pub fn coordinate_hyperplane(dim: usize, i: usize) -> Self {
        let vs: Vec<Point> = (0..dim)
            .filter(|&j| j != i)
            .map(|j| {
                let mut e = vec![0.0; dim];
                e[j] = 1.0;
                e
            })
            .collect();
        let name = ["x", "y", "z", "w"].get(i).map_or(format!("x{i}=0"), |s| format!("{{{s}=0}}"));
        Self::subspace(name, dim, &vs).expect("coordinate vectors")
    }

    pub fn ray(name: impl Into<String>, direction: &[f64]) -> Result<Self> {
        let u = normalize(direction).ok_or_else(|| GermError::Spec("ray direction is zero".into()))?;
        Ok(Self::build(name, u.len(), GermKind::Cone { generators: vec![u], edges: vec![], eta: 1e-9 }))
    }

    pub fn algebraic(name: impl Into<String>, dim: usize, equations: Vec<Poly>, inequalities: Vec<Poly>) -> Result<Self> {
        for p in equations.iter().chain(&inequalities) {
            p.check_arity(dim)?;
        }
        Ok(Self::build(name, dim, GermKind::Algebraic { equations, inequalities }))
    }

    pub fn parametric(name: impl Into<String>, dim: usize, branches: Vec<Branch>) -> Result<Self> {
        if branches.is_empty() {
            return Err(GermError::Spec("parametric germ needs a branch".into()));
        }
        for b in &branches {
            if !(b.u_max > 0.0 && b.u_max.is_finite()) {
                return Err(GermError::Spec("branch parameter range must be (0, u_max] with u_max > 0".into()));
            }
            let p = (b.curve)(b.u_max);
            if p.len() != dim {
                return Err(GermError::Dimension { expected: dim, got: p.len() });
            }
        }
        Ok(Self::build(name, dim, GermKind::Parametric { branches }))
    }

    pub fn sequence(name: impl Into<String>, dim: usize, term: TermFn) -> Result<Self> {
        let p = term(1);
        if p.len() != dim {
            return Err(GermError::Dimension { expected: dim, got: p.len() });
        }
        Ok(Self::build(name, dim, GermKind::Sequence { term, max_index: 1 << 40 }))
    }

    /// The cone over unit `generators`, filled along `edges`.
    pub fn cone(name: impl Into<String>, generators: Vec<Point>, edges: Vec<(usize, usize)>, eta: f64) -> Result<Self> {
        let dim = generators.first().map(Vec::len).ok_or_else(|| GermError::Spec("cone needs generators".into()))?;
        let generators = generators
            .iter()
            .map(|g| {
                if g.len() != dim {
                    return Err(GermError::Dimension { expected: dim, got: g.len() });
                }
                normalize(g).ok_or_else(|| GermError::Spec("zero cone generator".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        if edges.iter().any(|&(i, j)| i >= generators.len() || j >= generators.len()) {
            return Err(GermError::Spec("cone edge refers to a missing generator".into()));
        }
        Ok(Self::build(name, dim, GermKind::Cone { generators, edges, eta }))
    }

    pub fn radial_bands(name: impl Into<String>, dim: usize, bands: Vec<(f64, f64)>) -> Result<Self> {
        if bands.iter().any(|&(a, b)| !(0.0 <= a && a <= b)) {
            return Err(GermError::Spec("bands must satisfy 0 <= lo <= hi".into()));
        }
        Ok(Self::build(name, dim, GermKind::RadialBands { bands }))
    }

    /// The image `h(A)`.
    pub fn mapped(base: GermSet, map: LipschitzMap) -> Result<Self> {
        if map.dim_in != base.dim {
            return Err(GermError::Dimension { expected: base.dim, got: map.dim_in });
        }
        let name = format!("{}({})", map.name, base.name);
        let dim = map.dim_out;
        Ok(Self::build(name, dim, GermKind::Mapped { base: Arc::new(base), map: Arc::new(map) }))
    }

    pub fn union(name: impl Into<String>, parts: Vec<GermSet>) -> Result<Self> {
        let dim = parts.first().map(|p| p.dim).ok_or_else(|| GermError::Spec("empty union".into()))?;
        if let Some(p) = parts.iter().find(|p| p.dim != dim) {
            return Err(GermError::Dimension { expected: dim, got: p.dim });
        }
        Ok(Self::build(name, dim, GermKind::Union { parts }))
    }

    /// Attaches an exact nearest-point oracle.
    pub fn with_nearest(mut self, f: NearestFn) -> Self {
        self.nearest = Some(f);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn kind(&self) -> &GermKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            GermKind::Whole => "whole",
            GermKind::Subspace { .. } => "subspace",
            GermKind::Algebraic { .. } => "semialgebraic",
            GermKind::Parametric { .. } => "parametric",
            GermKind::Sequence { .. } => "sequence",
            GermKind::Cone { .. } => "cone",
            GermKind::RadialBands { .. } => "radial_bands",
            GermKind::Mapped { .. } => "mapped",
            GermKind::Union { .. } => "union",
        }
    }

    /// True when `distance_estimate` returns a collapsed interval.
    pub fn has_exact_distance(&self) -> bool {
        self.nearest.is_some()
            || match &self.kind {
                GermKind::Whole | GermKind::Subspace { .. } | GermKind::Cone { .. } | GermKind::RadialBands { .. } => true,
                GermKind::Union { parts } => parts.iter().all(GermSet::has_exact_distance),
                _ => false,
            }
    }

    /// Membership with relative tolerance `tol` (distance `<= tol * |x|`,
    /// or residuals `<= tol * magnitude` for equations).
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let r = norm(x);
        if let Some(f) = &self.nearest {
            return dist(x, &f(x)) <= tol * r;
        }
        match &self.kind {
            GermKind::Whole => true,
            GermKind::Subspace { basis } => distance::subspace_dist(x, basis) <= tol * r,
            GermKind::Algebraic { equations, inequalities } => {
                let tol = tol.max(EQUATION_TOL);
                equations.iter().all(|p| p.eval(x).abs() <= tol * p.magnitude(x))
                    && inequalities.iter().all(|p| p.eval(x) >= -tol * p.magnitude(x))
            }
            GermKind::Cone { generators, edges, eta } => {
                distance::cone_nearest(x, generators, edges).1 <= (eta.sin() + tol) * r
            }
            GermKind::RadialBands { bands } => bands.iter().any(|&(a, b)| a * (1.0 - tol) <= r && r <= b * (1.0 + tol)),
            GermKind::Mapped { base, map } => match map.apply_inverse(x) {
                Some(y) => base.contains(&y, tol),
                None => self.distance_estimate(x, Budget::default(), 0).upper <= tol * r,
            },
            GermKind::Union { parts } => parts.iter().any(|p| p.contains(x, tol)),
            GermKind::Parametric { .. } | GermKind::Sequence { .. } => {
                self.distance_estimate(x, Budget::default(), 0).upper <= tol * r
            }
        }
    }

    /// Membership at the default tolerance for this germ's kind.
    pub fn contains_default(&self, x: &[f64]) -> bool {
        self.contains(x, 1e-9)
    }

    /// Returns at most `count` points `x` of the germ with `r/2 <= |x| <= r`;
    /// a pure function of `(r, count, seed)`.
    pub fn sample_shell(&self, r: f64, count: usize, seed: u64) -> Vec<Point> {
        sample::sample_shell(self, r, count, seed)
    }

    /// Errors if no shell of the schedule yields a point.
    pub fn check_adherent(&self, schedule: &Schedule, seed: u64) -> Result<()> {
        if schedule.radii().iter().any(|&r| !self.sample_shell(r, 4, seed).is_empty()) {
            Ok(())
        } else {
            Err(GermError::EmptyGerm(self.name.clone()))
        }
    }

    /// Bounds on `dist(x, A)`.
    pub fn distance_estimate(&self, x: &[f64], budget: Budget, seed: u64) -> DistanceBound {
        distance::estimate(self, x, budget, seed)
    }

    /// Best available point estimate of `dist(x, A)` (the upper bound).
    pub fn dist(&self, x: &[f64]) -> f64 {
        self.distance_estimate(x, Budget::default(), 0).upper
    }
}

#[cfg(test)]
mod tests;
