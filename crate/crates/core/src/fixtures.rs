//! A catalog of germs, maps and sequences with known answers.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{GermError, Result};
use crate::geom::{nearest_on_curve, norm, Point};
use crate::germ::{Branch, GermSet, Schedule};
use crate::lipschitz::LipschitzMap;
use crate::poly::Poly;

/// `x^2 + y^2 = z^6` in `R^3`: a horn around the z-axis.
pub fn horn() -> GermSet {
    let p = Poly::from_terms([(1.0, vec![2, 0, 0]), (1.0, vec![0, 2, 0]), (-1.0, vec![0, 0, 6])]);
    GermSet::algebraic("horn", 3, vec![p], vec![])
        .expect("arity 3")
        .with_nearest(Arc::new(|x: &[f64]| {
            let rho0 = x[0].hypot(x[1]);
            let reach = 2.0 * norm(x);
            let (z, p) = nearest_on_curve(|z| vec![z.abs().powi(3), z], -reach, reach, &[rho0, x[2]], 64);
            let _ = z;
            lift_from_half_plane(x, 2, p[0], p[1])
        }))
}

/// Maps `(rho, z)` in the meridian half-plane of `x` back to `R^3`, where
/// `axis` is the coordinate playing the role of `z`.
fn lift_from_half_plane(x: &[f64], axis: usize, rho: f64, z: f64) -> Point {
    let others: Vec<usize> = (0..x.len()).filter(|&i| i != axis).collect();
    let rho0 = others.iter().map(|&i| x[i] * x[i]).sum::<f64>().sqrt();
    let mut out = vec![0.0; x.len()];
    for (k, &i) in others.iter().enumerate() {
        out[i] = if rho0 > 0.0 {
            rho * x[i] / rho0
        } else if k == 0 {
            rho
        } else {
            0.0
        };
    }
    out[axis] = z;
    out
}

/// The round cone `sum_{i != axis} x_i^2 = x_axis^2` in `R^3`.
pub fn round_cone(axis: usize) -> GermSet {
    let terms = (0..3).map(|i| {
        let mut e = vec![0u32; 3];
        e[i] = 2;
        (if i == axis { -1.0 } else { 1.0 }, e)
    });
    let names = ["x", "y", "z"];
    let name = format!("cone around {}-axis", names[axis]);
    GermSet::algebraic(name, 3, vec![Poly::from_terms(terms)], vec![])
        .expect("arity 3")
        .with_nearest(Arc::new(move |x: &[f64]| {
            let rho0 = (0..3).filter(|&i| i != axis).map(|i| x[i] * x[i]).sum::<f64>().sqrt();
            let z0 = x[axis];
            let s = (rho0 + z0.abs()) / 2.0;
            lift_from_half_plane(x, axis, s, s * z0.signum())
        }))
}

/// `y^2 = x^3` in `R^2`, parametrised by `u -> (u^2, u^3)`.
pub fn cusp() -> GermSet {
    let p = Poly::from_terms([(1.0, vec![0, 2]), (-1.0, vec![3, 0])]);
    GermSet::algebraic("cusp", 2, vec![p], vec![])
        .expect("arity 2")
        .with_nearest(Arc::new(|x: &[f64]| {
            let reach = (2.0 * norm(x)).sqrt() + 2.0 * norm(x);
            nearest_on_curve(|u| vec![u * u, u * u * u], -reach, reach, x, 64).1
        }))
}

/// The graph `y = x^3` in `R^2`.
pub fn cubic_graph() -> GermSet {
    let p = Poly::from_terms([(1.0, vec![0, 1]), (-1.0, vec![3, 0])]);
    GermSet::algebraic("cubic graph", 2, vec![p], vec![])
        .expect("arity 2")
        .with_nearest(Arc::new(|x: &[f64]| {
            let reach = 2.0 * norm(x);
            nearest_on_curve(|u| vec![u, u * u * u], -reach, reach, x, 64).1
        }))
}

/// The graph of `x sin ln|x|`, as the image of the x-axis under the
/// oscillation map.
pub fn oscillating_graph() -> GermSet {
    GermSet::mapped(GermSet::axis(2, 0), LipschitzMap::oscillation())
        .expect("dimensions agree")
        .with_name("oscillating graph")
}

/// The image of `Y = exp(-1/X^2)` under `(X, Y) -> (XY, Y)`: a germ tangent
/// to the positive y-axis more tightly than any power.
pub fn flat_horn() -> GermSet {
    let branch = |sign: f64| Branch {
        curve: Arc::new(move |u: f64| {
            let y = (-1.0 / (u * u)).exp();
            vec![sign * u * y, y]
        }),
        u_max: 1.0,
    };
    GermSet::parametric("flat horn", 2, vec![branch(1.0), branch(-1.0)]).expect("two branches")
}

fn exp_partial_sum(m: u64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=m.min(40) {
        term /= k as f64;
        sum += term;
    }
    sum
}

/// `a_m = (1/m, e_m/m)` with `e_m` the m-th partial sum of the series of `e`.
pub fn exp_sequence_a() -> GermSet {
    GermSet::sequence("a_m", 2, Arc::new(|m: u64| {
        let inv = 1.0 / m as f64;
        vec![inv, inv * exp_partial_sum(m)]
    }))
    .expect("dimension 2")
}

/// `b_m = (0, e_m/m)`.
pub fn exp_sequence_b() -> GermSet {
    GermSet::sequence("b_m", 2, Arc::new(|m: u64| vec![0.0, exp_partial_sum(m) / m as f64])).expect("dimension 2")
}

/// `{(4^-k, 0)}`: consecutive points at ratio 4, so a probe halfway in
/// log-scale sits at relative distance 0.6 from the set.
pub fn quartic_sequence() -> GermSet {
    GermSet::sequence("4^-k", 2, Arc::new(|m: u64| vec![0.25f64.powi(m as i32), 0.0])).expect("dimension 2")
}

/// Full annuli on the even shells of the default schedule only.
pub fn even_annuli() -> GermSet {
    let s = Schedule::default();
    let bands = (0..40)
        .map(|j| {
            let r = s.r0 * s.ratio.powi(2 * j);
            (0.5 * r, r)
        })
        .collect();
    GermSet::radial_bands("even annuli", 2, bands).expect("valid bands")
}

/// Where a ground-truth value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    /// Stated with the published example.
    Published,
    /// Computed by hand from a closed form.
    Analytic,
    /// True by construction.
    Construction,
}

#[derive(Debug, Clone, Serialize)]
pub struct Truth {
    pub key: String,
    pub value: Value,
    pub basis: Basis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hypotheses {
    pub definable: bool,
    pub bi_lipschitz: bool,
    pub image_definable: bool,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub germs: Vec<(&'static str, GermSet)>,
    pub map: Option<LipschitzMap>,
    pub truths: Vec<Truth>,
    pub flags: Hypotheses,
    pub schedule: Schedule,
    /// Scale-artifact or field-dependent fixtures are kept out of the
    /// invariant assertions.
    pub toy: bool,
}

impl Fixture {
    pub fn germ(&self, role: &str) -> Result<&GermSet> {
        self.germs
            .iter()
            .find(|(r, _)| *r == role)
            .map(|(_, g)| g)
            .ok_or_else(|| GermError::Unknown { what: "germ role", name: format!("{}:{role}", self.name) })
    }

    pub fn truth(&self, key: &str) -> Option<&Value> {
        self.truths.iter().find(|t| t.key == key).map(|t| &t.value)
    }

    pub fn summary(&self) -> Value {
        json!({
            "name": self.name,
            "description": self.description,
            "germs": self.germs.iter().map(|(r, g)| json!({"role": r, "name": g.name, "dim": g.dim, "kind": g.kind_name()})).collect::<Vec<_>>(),
            "map": self.map.as_ref().map(|m| json!({"name": m.name, "constants": m.constants, "source": m.source})),
            "ground_truth": self.truths,
            "hypotheses": self.flags,
            "schedule": self.schedule,
            "toy": self.toy,
        })
    }
}

fn truth(key: &str, value: Value, basis: Basis) -> Truth {
    Truth { key: key.into(), value, basis }
}

const DEFINABLE: Hypotheses = Hypotheses { definable: true, bi_lipschitz: true, image_definable: true };

/// Deep schedule for germs whose gauge exponent only drifts to zero
/// logarithmically.
pub fn deep_schedule() -> Schedule {
    Schedule { r0: 1e-10, ratio: 1e-5, shells: 12 }
}

pub fn catalog() -> Vec<Fixture> {
    let basic = |name, description, germs: Vec<(&'static str, GermSet)>, truths| Fixture {
        name,
        description,
        germs,
        map: None,
        truths,
        flags: DEFINABLE,
        schedule: Schedule::default(),
        toy: false,
    };
    let e = std::f64::consts::E;
    let r = (1.0 + e * e).sqrt();
    vec![
        Fixture {
            name: "horn",
            description: "x^2 + y^2 = z^6 and its image under the homeomorphism (x, y, z^3)",
            germs: vec![("A", horn()), ("hA", round_cone(2)), ("LD", GermSet::axis(3, 2))],
            map: Some(LipschitzMap::cube_z()),
            truths: vec![
                truth("dim_D_A", json!(0), Basis::Published),
                truth("dim_D_hA", json!(1), Basis::Published),
                truth("D_A", json!([[0, 0, 1], [0, 0, -1]]), Basis::Analytic),
                truth("gauge_exponent_to_LD", json!(2.0), Basis::Analytic),
            ],
            flags: Hypotheses { definable: true, bi_lipschitz: false, image_definable: true },
            schedule: Schedule::default(),
            toy: false,
        },
        Fixture {
            name: "oscillation",
            description: "the x-axis and its image under (x, y + x sin ln|x|)",
            germs: vec![("A", GermSet::axis(2, 0)), ("hA", oscillating_graph())],
            map: Some(LipschitzMap::oscillation()),
            truths: vec![
                truth("dim_D_A", json!(0), Basis::Published),
                truth("dim_D_hA", json!(1), Basis::Published),
                truth("arc_half_angle", json!(2f64.sqrt().atan()), Basis::Analytic),
            ],
            flags: Hypotheses { definable: true, bi_lipschitz: true, image_definable: false },
            schedule: Schedule::default(),
            toy: false,
        },
        Fixture {
            name: "exp-sequences",
            description: "a_m = (1/m, e_m/m) and b_m = (0, e_m/m); over the reals only the limit directions are visible",
            germs: vec![("A", exp_sequence_a()), ("B", exp_sequence_b())],
            map: LipschitzMap::shear(2, 1, 0, -1.0 / e).ok(),
            truths: vec![
                truth("D_A", json!([[1.0 / r, e / r]]), Basis::Published),
                truth("D_B", json!([[0, 1]]), Basis::Analytic),
                truth("dim_D_A", json!(0), Basis::Analytic),
            ],
            flags: DEFINABLE,
            schedule: Schedule::default(),
            toy: true,
        },
        Fixture {
            name: "flat-horn",
            description: "image of Y = exp(-1/X^2) under (X, Y) -> (XY, Y), against the positive y-axis",
            germs: vec![
                ("A", flat_horn()),
                ("LD", GermSet::ray("positive y-axis", &[0.0, 1.0]).expect("nonzero")),
            ],
            map: None,
            truths: vec![
                truth("monomial_gauge_to_LD", json!(false), Basis::Published),
                truth("dim_D_A", json!(0), Basis::Analytic),
            ],
            flags: Hypotheses { definable: false, bi_lipschitz: true, image_definable: false },
            schedule: deep_schedule(),
            toy: false,
        },
        basic(
            "cusp",
            "y^2 = x^3 against its tangent ray",
            vec![("A", cusp()), ("LD", GermSet::ray("positive x-axis", &[1.0, 0.0]).expect("nonzero"))],
            vec![
                truth("D_A", json!([[1, 0]]), Basis::Analytic),
                truth("dim_D_A", json!(0), Basis::Analytic),
                truth("gauge_exponent_to_LD", json!(0.5), Basis::Analytic),
            ],
        ),
        basic(
            "cubic",
            "the graph y = x^3 against the x-axis",
            vec![("A", cubic_graph()), ("LD", GermSet::axis(2, 0))],
            vec![
                truth("dim_D_A", json!(0), Basis::Analytic),
                truth("gauge_exponent_to_LD", json!(2.0), Basis::Analytic),
            ],
        ),
        basic(
            "round-cone",
            "x^2 + y^2 = z^2",
            vec![("A", round_cone(2))],
            vec![truth("dim_D_A", json!(1), Basis::Analytic)],
        ),
        basic(
            "line",
            "the z-axis in R^3",
            vec![("A", GermSet::axis(3, 2))],
            vec![truth("dim_D_A", json!(0), Basis::Construction)],
        ),
        basic(
            "plane",
            "the plane z = 0 in R^3",
            vec![("A", GermSet::coordinate_hyperplane(3, 2))],
            vec![truth("dim_D_A", json!(1), Basis::Construction)],
        ),
        basic(
            "ray",
            "the ray through (1, 1, 0)",
            vec![("A", GermSet::ray("ray(1,1,0)", &[1.0, 1.0, 0.0]).expect("nonzero"))],
            vec![truth("dim_D_A", json!(0), Basis::Construction)],
        ),
        basic(
            "space",
            "all of R^3",
            vec![("A", GermSet::whole(3))],
            vec![truth("dim_D_A", json!(2), Basis::Construction)],
        ),
        Fixture {
            name: "shear",
            description: "the coordinate axes of R^2 under a linear shear",
            germs: vec![("A", GermSet::axis(2, 0)), ("B", GermSet::axis(2, 1))],
            map: LipschitzMap::shear(2, 0, 1, 1.0).ok(),
            truths: vec![truth("dim_D_A_cap_D_B", json!(-1), Basis::Construction)],
            flags: DEFINABLE,
            schedule: Schedule::default(),
            toy: false,
        },
        Fixture {
            name: "rotation",
            description: "two coordinate planes of R^3 under a rotation",
            germs: vec![
                ("A", GermSet::coordinate_hyperplane(3, 2)),
                ("B", GermSet::coordinate_hyperplane(3, 1)),
            ],
            map: LipschitzMap::rotation(3, 0, 2, 0.6).ok(),
            truths: vec![truth("dim_D_A_cap_D_B", json!(0), Basis::Construction)],
            flags: DEFINABLE,
            schedule: Schedule::default(),
            toy: false,
        },
        Fixture {
            name: "quartic-sequence",
            description: "the points (4^-k, 0); fails the selection property below relative gap 0.6",
            germs: vec![("A", quartic_sequence())],
            map: None,
            truths: vec![truth("ssp_threshold", json!(0.6), Basis::Analytic)],
            flags: DEFINABLE,
            schedule: Schedule::default(),
            toy: true,
        },
        Fixture {
            name: "even-annuli",
            description: "full annuli on every other shell; probes on the empty shells fail",
            germs: vec![("A", even_annuli())],
            map: None,
            truths: vec![truth("dim_D_A", json!(1), Basis::Construction)],
            flags: Hypotheses { definable: false, bi_lipschitz: true, image_definable: false },
            schedule: Schedule::default(),
            toy: true,
        },
    ]
}

pub fn fixture(name: &str) -> Result<Fixture> {
    catalog()
        .into_iter()
        .find(|f| f.name == name)
        .ok_or_else(|| GermError::Unknown { what: "fixture", name: name.into() })
}

/// A pair of germs and a map for the directional-dimension equality.
#[derive(Debug, Clone)]
pub struct Triple {
    pub name: String,
    pub a: GermSet,
    pub b: GermSet,
    pub map: LipschitzMap,
    /// `dim(D(A) ∩ D(B))`, `-1` for the empty set.
    pub expected: i32,
}

/// Definable germ pairs under definable bi-Lipschitz maps.
pub fn equality_triples() -> Vec<Triple> {
    let t = |name: &str, a: GermSet, b: GermSet, map: Result<LipschitzMap>, expected| Triple {
        name: name.into(),
        a,
        b,
        map: map.expect("catalog map"),
        expected,
    };
    let plane = |i| GermSet::coordinate_hyperplane(3, i);
    let general = vec![vec![1.0, 0.5, 0.0], vec![0.2, 1.0, 0.3], vec![0.0, -0.4, 1.2]];
    vec![
        t("axes/shear", GermSet::axis(2, 0), GermSet::axis(2, 1), LipschitzMap::shear(2, 0, 1, 1.0), -1),
        t("horn,z-axis/linear", horn(), GermSet::axis(3, 2), LipschitzMap::linear("general", &general), 0),
        t("planes/rotation", plane(2), plane(1), LipschitzMap::rotation(3, 0, 2, 0.6), 0),
        t("plane,cone/radial", plane(2), round_cone(2), Ok(LipschitzMap::radial(3)), -1),
        t("cone,cone/twist", round_cone(2), round_cone(2), LipschitzMap::twist(3, 1.0), 1),
        t("cusp,x-axis/radial", cusp(), GermSet::axis(2, 0), Ok(LipschitzMap::radial(2)), 0),
        t("plane,plane/shear", plane(2), plane(2), LipschitzMap::shear(3, 0, 2, 0.8), 1),
        t("planes/poly-shear", plane(2), plane(0), LipschitzMap::poly_shear(3), 0),
        t("space,x-axis/linear", GermSet::whole(2), GermSet::axis(2, 0), LipschitzMap::shear(2, 1, 0, 0.5), 0),
        t(
            "ray,plane/linear",
            GermSet::ray("ray(1,1,0)", &[1.0, 1.0, 0.0]).expect("nonzero"),
            plane(2),
            LipschitzMap::linear("general", &general),
            0,
        ),
        t("cones/rotation", round_cone(2), round_cone(1), LipschitzMap::rotation(3, 0, 1, 0.3), 0),
        t("horn,x-axis/twist", horn(), GermSet::axis(3, 0), LipschitzMap::twist(3, 1.0), -1),
    ]
}
