use serde::Serialize;

use crate::directions::{direction_intersection_dim, direction_set_estimate, tangent_cone, DirectionParams, IntersectionReport};
use crate::error::Result;
use crate::fixtures::Hypotheses;
use crate::geom::mix_seed;
use crate::germ::GermSet;
use crate::lipschitz::{constants_estimate, ConstantsEstimate, LipschitzMap};
use crate::verdict::Verdict;

/// Confidence below which dimension comparisons abstain.
pub const MIN_CONFIDENCE: f64 = 0.8;

#[derive(Debug, Clone, Serialize)]
pub struct DimInequalityReport {
    /// Dimension of the tangent cone `E` (direction dimension plus one).
    pub cone_dim: i32,
    /// Dimension of the tangent cone of `h(E)`.
    pub image_cone_dim: i32,
    pub holds: bool,
    pub confidence: f64,
    pub verdict: Verdict,
}

/// `dim LD(h(E)) <= dim E` for `E` the estimated tangent cone of `A`.
pub fn dim_inequality_check(h: &LipschitzMap, a: &GermSet, p: &DirectionParams) -> Result<DimInequalityReport> {
    let d = direction_set_estimate(a, p)?;
    let cone = tangent_cone(&d)?;
    let image = GermSet::mapped(cone, h.clone())?;
    let di = direction_set_estimate(&image, &DirectionParams { seed: mix_seed(p.seed, 7), ..*p })?;
    let cone_dim = d.estimate.dim + 1;
    let image_cone_dim = di.estimate.dim + 1;
    let holds = image_cone_dim <= cone_dim;
    let confidence = d.estimate.confidence.min(di.estimate.confidence);
    let verdict = if confidence < MIN_CONFIDENCE { Verdict::Abstain } else { Verdict::from_bool(holds) };
    Ok(DimInequalityReport { cone_dim, image_cone_dim, holds, confidence, verdict })
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    /// `dim(D(A) ∩ D(B))`.
    pub before: IntersectionReport,
    /// `dim(D(h(A)) ∩ D(h(B)))`.
    pub after: IntersectionReport,
    pub equal: bool,
    pub hypotheses: Hypotheses,
    /// Hypotheses that fail, declared or detected.
    pub violations: Vec<String>,
    pub constants: ConstantsEstimate,
    pub verdict: Verdict,
}

/// End-to-end check that the dimension of the intersection of direction
/// sets survives the map. A failed hypothesis fails the check whatever
/// the dimensions say, and the report names it.
pub fn invariant_check(
    a: &GermSet,
    b: &GermSet,
    h: &LipschitzMap,
    hypotheses: Hypotheses,
    p: &DirectionParams,
) -> Result<InvariantReport> {
    let before = direction_intersection_dim(a, b, p)?;
    let ha = GermSet::mapped(a.clone(), h.clone())?;
    let hb = GermSet::mapped(b.clone(), h.clone())?;
    let after = direction_intersection_dim(&ha, &hb, &DirectionParams { seed: mix_seed(p.seed, 11), ..*p })?;
    let constants = constants_estimate(h, h.region_radius, 4000, p.seed)?;
    let mut violations = Vec::new();
    if !hypotheses.definable {
        violations.push("germs are not definable".to_string());
    }
    if !hypotheses.bi_lipschitz || !h.is_bi_lipschitz() || constants.inverse_unbounded || constants.forward_unbounded {
        violations.push("map is not bi-Lipschitz".to_string());
    }
    if !hypotheses.image_definable {
        violations.push("image is not definable".to_string());
    }
    let equal = before.dim == after.dim;
    let confident = before.confidence >= MIN_CONFIDENCE && after.confidence >= MIN_CONFIDENCE;
    let verdict = if !violations.is_empty() {
        Verdict::Fail
    } else if !confident {
        Verdict::Abstain
    } else {
        Verdict::from_bool(equal)
    };
    Ok(InvariantReport { before, after, equal, hypotheses, violations, constants, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fixture, horn};

    #[test]
    fn identity_keeps_the_cone_dimension() {
        let r = dim_inequality_check(&LipschitzMap::identity(3), &horn(), &DirectionParams::default()).unwrap();
        assert_eq!((r.cone_dim, r.image_cone_dim), (1, 1));
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn oscillation_breaks_equality_and_is_flagged() {
        let f = fixture("oscillation").unwrap();
        let a = f.germ("A").unwrap();
        let r = invariant_check(a, a, f.map.as_ref().unwrap(), f.flags, &DirectionParams::default()).unwrap();
        assert_eq!((r.before.dim, r.after.dim), (0, 1));
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.violations.iter().any(|v| v.contains("image")));
    }
}
