//! JSON descriptions of germs and maps.
//!
//! ```json
//! {"kind": "mapped",
//!  "base": {"kind": "subspace", "dim": 2, "basis": [[1, 0]]},
//!  "map": {"kind": "named", "name": "oscillation"}}
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};
use crate::expr::ExprVec;
use crate::fixtures;
use crate::geom::Point;
use crate::germ::{Branch, GermSet};
use crate::lipschitz::LipschitzMap;
use crate::poly::Poly;

/// Upper bound on ambient dimensions accepted from configs.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GermSpec {
    /// A germ of a catalog fixture; `role` defaults to `"A"`.
    Fixture { name: String, role: Option<String> },
    Whole { dim: usize },
    Subspace { dim: usize, basis: Vec<Point> },
    Ray { direction: Point },
    /// Polynomials as `[coefficient, [exponents]]` terms; inequalities are
    /// `p >= 0`.
    Algebraic {
        dim: usize,
        equations: Vec<Poly>,
        #[serde(default)]
        inequalities: Vec<Poly>,
    },
    /// Curves written in the parameter `u`, each on `(0, u_max]`.
    Parametric { dim: usize, branches: Vec<Vec<String>>, u_max: f64 },
    /// Terms written in the index `m >= 1`.
    Sequence { dim: usize, term: Vec<String> },
    Cone {
        generators: Vec<Point>,
        #[serde(default)]
        edges: Vec<(usize, usize)>,
        #[serde(default = "default_cone_eta")]
        eta: f64,
    },
    Bands { dim: usize, bands: Vec<(f64, f64)> },
    Mapped { base: Box<GermSpec>, map: MapSpec },
    Union { parts: Vec<GermSpec> },
}

fn default_cone_eta() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// `identity`, `oscillation`, `cube_z`, `radial`, `twist`, `poly_shear`;
    /// `param` is the twist rate.
    Named { name: String, dim: Option<usize>, param: Option<f64> },
    /// The map of a catalog fixture.
    Fixture { name: String },
    Linear { rows: Vec<Point> },
    Shear { dim: usize, from: usize, to: usize, k: f64 },
    Rotation { dim: usize, i: usize, j: usize, angle: f64 },
    Scaling { dim: usize, factor: f64 },
    /// Coordinate expressions in `x, y, z, w` (or `x1, x2, ...`).
    Expr {
        dim: usize,
        forward: Vec<String>,
        inverse: Option<Vec<String>>,
        constants: Option<(f64, f64)>,
    },
    Compose { outer: Box<MapSpec>, inner: Box<MapSpec> },
}

fn check_dim(dim: usize) -> Result<usize> {
    if dim == 0 || dim > MAX_DIM {
        return Err(GermError::Spec(format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
    }
    Ok(dim)
}

fn check_point(p: &[f64], dim: usize) -> Result<()> {
    if p.len() != dim {
        return Err(GermError::Dimension { expected: dim, got: p.len() });
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(GermError::Spec("coordinates must be finite".into()));
    }
    Ok(())
}

impl GermSpec {
    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| GermError::Spec(e.to_string()))
    }

    pub fn build(&self) -> Result<GermSet> {
        match self {
            GermSpec::Fixture { name, role } => {
                let f = fixtures::fixture(name)?;
                f.germ(role.as_deref().unwrap_or("A")).cloned()
            }
            GermSpec::Whole { dim } => Ok(GermSet::whole(check_dim(*dim)?)),
            GermSpec::Subspace { dim, basis } => {
                let dim = check_dim(*dim)?;
                basis.iter().try_for_each(|v| check_point(v, dim))?;
                GermSet::subspace("subspace", dim, basis)
            }
            GermSpec::Ray { direction } => {
                check_point(direction, check_dim(direction.len())?)?;
                GermSet::ray("ray", direction)
            }
            GermSpec::Algebraic { dim, equations, inequalities } => {
                let dim = check_dim(*dim)?;
                for p in equations.iter().chain(inequalities) {
                    p.check_arity(dim)?;
                }
                GermSet::algebraic("algebraic", dim, equations.clone(), inequalities.clone())
            }
            GermSpec::Parametric { dim, branches, u_max } => {
                let dim = check_dim(*dim)?;
                if !(*u_max > 0.0 && u_max.is_finite()) {
                    return Err(GermError::Spec(format!("u_max must be positive, got {u_max}")));
                }
                let branches = branches
                    .iter()
                    .map(|src| {
                        let f = ExprVec::parse(src, &["u"])?;
                        if f.len() != dim {
                            return Err(GermError::Dimension { expected: dim, got: f.len() });
                        }
                        Ok(Branch { curve: Arc::new(move |u: f64| f.eval(&[u])), u_max: *u_max })
                    })
                    .collect::<Result<Vec<_>>>()?;
                GermSet::parametric("parametric", dim, branches)
            }
            GermSpec::Sequence { dim, term } => {
                let dim = check_dim(*dim)?;
                let f = ExprVec::parse(term, &["m"])?;
                if f.len() != dim {
                    return Err(GermError::Dimension { expected: dim, got: f.len() });
                }
                GermSet::sequence("sequence", dim, Arc::new(move |m: u64| f.eval(&[m as f64])))
            }
            GermSpec::Cone { generators, edges, eta } => {
                let dim = check_dim(generators.first().map_or(0, |g| g.len()))?;
                generators.iter().try_for_each(|g| check_point(g, dim))?;
                GermSet::cone("cone", generators.clone(), edges.clone(), *eta)
            }
            GermSpec::Bands { dim, bands } => GermSet::radial_bands("bands", check_dim(*dim)?, bands.clone()),
            GermSpec::Mapped { base, map } => GermSet::mapped(base.build()?, map.build()?),
            GermSpec::Union { parts } => {
                let parts = parts.iter().map(GermSpec::build).collect::<Result<Vec<_>>>()?;
                GermSet::union("union", parts)
            }
        }
    }
}

impl MapSpec {
    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| GermError::Spec(e.to_string()))
    }

    pub fn build(&self) -> Result<LipschitzMap> {
        match self {
            MapSpec::Named { name, dim, param } => {
                let n = check_dim(dim.unwrap_or(match name.as_str() {
                    "oscillation" | "poly_shear" => 2,
                    _ => 3,
                }))?;
                match name.as_str() {
                    "identity" => Ok(LipschitzMap::identity(n)),
                    "oscillation" if n == 2 => Ok(LipschitzMap::oscillation()),
                    "cube_z" if n == 3 => Ok(LipschitzMap::cube_z()),
                    "radial" => Ok(LipschitzMap::radial(n)),
                    "twist" => LipschitzMap::twist(n, param.unwrap_or(1.0)),
                    "poly_shear" => LipschitzMap::poly_shear(n),
                    "oscillation" | "cube_z" => Err(GermError::Dimension { expected: if name == "cube_z" { 3 } else { 2 }, got: n }),
                    _ => Err(GermError::Unknown { what: "map", name: name.clone() }),
                }
            }
            MapSpec::Fixture { name } => fixtures::fixture(name)?
                .map
                .ok_or_else(|| GermError::Spec(format!("fixture {name} has no map"))),
            MapSpec::Linear { rows } => {
                let n = check_dim(rows.len())?;
                rows.iter().try_for_each(|r| check_point(r, n))?;
                LipschitzMap::linear("linear", rows)
            }
            MapSpec::Shear { dim, from, to, k } => LipschitzMap::shear(check_dim(*dim)?, *from, *to, *k),
            MapSpec::Rotation { dim, i, j, angle } => LipschitzMap::rotation(check_dim(*dim)?, *i, *j, *angle),
            MapSpec::Scaling { dim, factor } => LipschitzMap::scaling(check_dim(*dim)?, *factor),
            MapSpec::Expr { dim, forward, inverse, constants } => {
                let dim = check_dim(*dim)?;
                LipschitzMap::from_exprs("expr", dim, forward, inverse.as_deref(), *constants)
            }
            MapSpec::Compose { outer, inner } => outer.build()?.compose(&inner.build()?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_described_germs() {
        let g = GermSpec::from_json(
            r#"{"kind": "mapped", "base": {"kind": "subspace", "dim": 2, "basis": [[1, 0]]},
                "map": {"kind": "named", "name": "oscillation"}}"#,
        )
        .unwrap()
        .build()
        .unwrap();
        assert_eq!(g.dim, 2);
        let horn = GermSpec::from_json(
            r#"{"kind": "algebraic", "dim": 3, "equations": [[[1, [2, 0, 0]], [1, [0, 2, 0]], [-1, [0, 0, 6]]]]}"#,
        )
        .unwrap()
        .build()
        .unwrap();
        assert!(horn.contains(&[0.001, 0.0, 0.1], 1e-9));
        let half = GermSpec::from_json(r#"{"kind": "parametric", "dim": 2, "branches": [["u", "0"]], "u_max": 1}"#)
            .unwrap()
            .build()
            .unwrap();
        assert!(half.sample_shell(0.2, 10, 0).iter().all(|x| x[1] == 0.0));
    }

    #[test]
    fn rejects_malformed_descriptions() {
        for bad in [
            r#"{"kind": "whole", "dim": 0}"#,
            r#"{"kind": "whole", "dim": 2, "extra": 1}"#,
            r#"{"kind": "subspace", "dim": 2, "basis": [[1, 0, 0]]}"#,
            r#"{"kind": "sequence", "dim": 2, "term": ["1/m"]}"#,
            r#"{"kind": "mapped", "base": {"kind": "whole", "dim": 2}, "map": {"kind": "named", "name": "nope"}}"#,
            r#"{"kind": "fixture", "name": "nope"}"#,
        ] {
            assert!(GermSpec::from_json(bad).and_then(|s| s.build()).is_err(), "{bad}");
        }
    }

    #[test]
    fn round_trips() {
        let s = GermSpec::Mapped {
            base: Box::new(GermSpec::Ray { direction: vec![1.0, 2.0] }),
            map: MapSpec::Shear { dim: 2, from: 0, to: 1, k: 0.5 },
        };
        assert_eq!(GermSpec::from_json(&serde_json::to_string(&s).unwrap()).unwrap(), s);
    }
}
