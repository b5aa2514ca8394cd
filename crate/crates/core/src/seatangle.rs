//! Horn neighbourhoods `{x : dist(x, A) <= theta(|x|) |x|}`: membership,
//! inclusion, equivalence search, gauge transforms under bi-Lipschitz maps
//! and gauge fitting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};
use crate::gauge::Gauge;
use crate::geom::{add, mix_seed, norm, random_in_ball, rng_for, Point};
use crate::lipschitz::LipschitzMap;
use crate::germ::{Budget, GermSet, Schedule};

/// Relative band around the threshold inside which membership is undecided.
pub const BOUNDARY_TOL: f64 = 1e-6;
/// Largest fraction of undecided probes before an inclusion test abstains.
pub const MAX_INDETERMINATE: f64 = 0.05;
/// Fitted slopes at or below this mean the relative distance does not decay.
pub const MIN_SLOPE: f64 = 0.02;
pub const SAFETY: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Outside,
    Indeterminate,
}

/// Membership of one point together with `dist / (theta(|x|) |x|)` bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub membership: Membership,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
}

pub fn st_probe(x: &[f64], a: &GermSet, theta: &Gauge, budget: Budget, seed: u64) -> Probe {
    let r = norm(x);
    if r == 0.0 {
        return Probe { membership: Membership::Inside, ratio_lower: 0.0, ratio_upper: 0.0 };
    }
    let threshold = theta.eval_unchecked(r) * r;
    let b = a.distance_estimate(x, budget, seed);
    let membership = if b.upper <= threshold * (1.0 - BOUNDARY_TOL) {
        Membership::Inside
    } else if b.lower > threshold * (1.0 + BOUNDARY_TOL) {
        Membership::Outside
    } else {
        Membership::Indeterminate
    };
    Probe { membership, ratio_lower: b.lower / threshold, ratio_upper: b.upper / threshold }
}

/// Three-valued membership of `x` in the horn neighbourhood of `a`.
pub fn st_contains(x: &[f64], a: &GermSet, theta: &Gauge) -> Membership {
    st_probe(x, a, theta, Budget::default(), 0).membership
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Included,
    NotIncluded,
    Equivalent,
    NotEquivalent,
    Abstain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub point: Point,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct STVerdict {
    pub relation: Relation,
    /// `(theta1, theta2)` with `B ⊂ ST_theta1(A)` and `A ⊂ ST_theta2(B)`.
    pub witness_gauges: Option<(Gauge, Gauge)>,
    pub counterexamples: Vec<Counterexample>,
    /// Largest upper ratio over decided probes.
    pub max_ratio: f64,
    pub shells_checked: usize,
    pub decided: usize,
    pub indeterminate: usize,
    /// For equivalence searches, which inclusion failed.
    pub failed: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InclusionParams {
    pub schedule: Schedule,
    pub per_shell: usize,
    /// Only the finest `finest` shells decide the verdict.
    pub finest: usize,
    pub budget: Budget,
    pub seed: u64,
}

impl Default for InclusionParams {
    fn default() -> Self {
        InclusionParams { schedule: Schedule::default(), per_shell: 64, finest: 8, budget: Budget::default(), seed: 0 }
    }
}

impl InclusionParams {
    fn shells(&self) -> Vec<f64> {
        self.schedule.finest(self.finest.max(1))
    }
}

/// Tests `A ⊂ ST_theta(B)` on samples of `A`.
pub fn st_inclusion_test(a: &GermSet, b: &GermSet, theta: &Gauge, p: &InclusionParams) -> Result<STVerdict> {
    if a.dim != b.dim {
        return Err(GermError::Dimension { expected: a.dim, got: b.dim });
    }
    let shells = p.shells();
    let probes: Vec<Vec<(Point, Probe)>> = shells
        .par_iter()
        .enumerate()
        .map(|(j, &r)| {
            a.sample_shell(r, p.per_shell, p.seed)
                .into_iter()
                .enumerate()
                .map(|(i, x)| {
                    let pr = st_probe(&x, b, theta, p.budget, mix_seed(p.seed, (j * 100_003 + i) as u64));
                    (x, pr)
                })
                .collect()
        })
        .collect();
    let mut v = STVerdict {
        relation: Relation::Included,
        witness_gauges: None,
        counterexamples: Vec::new(),
        max_ratio: 0.0,
        shells_checked: probes.iter().filter(|s| !s.is_empty()).count(),
        decided: 0,
        indeterminate: 0,
        failed: None,
    };
    for (x, pr) in probes.into_iter().flatten() {
        match pr.membership {
            Membership::Indeterminate => v.indeterminate += 1,
            m => {
                v.decided += 1;
                v.max_ratio = v.max_ratio.max(pr.ratio_upper);
                if m == Membership::Outside {
                    v.counterexamples.push(Counterexample { point: x, ratio: pr.ratio_lower });
                }
            }
        }
    }
    let total = v.decided + v.indeterminate;
    if total == 0 {
        return Err(GermError::EmptyGerm(a.name.clone()));
    }
    v.relation = if v.indeterminate as f64 > MAX_INDETERMINATE * total as f64 {
        Relation::Abstain
    } else if v.counterexamples.is_empty() {
        Relation::Included
    } else {
        Relation::NotIncluded
    };
    Ok(v)
}

/// Log-spaced exponents searched for monomial gauges.
pub fn exponent_grid() -> Vec<f64> {
    let (lo, hi) = (0.05f64.ln(), 8f64.ln());
    (0..40).map(|i| (lo + (hi - lo) * i as f64 / 39.0).exp()).collect()
}

/// Relative distances `(|x|, dist(x, to) / |x|)` of samples of `from`.
fn relative_distances(from: &GermSet, to: &GermSet, p: &InclusionParams) -> Vec<(f64, f64)> {
    p.shells()
        .par_iter()
        .enumerate()
        .map(|(j, &r)| {
            from.sample_shell(r, p.per_shell, p.seed)
                .into_iter()
                .enumerate()
                .map(|(i, x)| {
                    let n = norm(&x);
                    let d = to.distance_estimate(&x, p.budget, mix_seed(p.seed, (j * 100_003 + i) as u64)).upper;
                    (n, d / n)
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect()
}

/// Smallest monomial `C t^alpha` over the exponent grid dominating the
/// relative distances (with the safety factor) and staying below 1 on the
/// sampled radii. A gauge reaching 1 would contain everything.
fn dominating_monomial(rel: &[(f64, f64)]) -> Option<Gauge> {
    let r_max = rel.iter().map(|&(n, _)| n).fold(0.0, f64::max);
    if rel.iter().all(|&(_, g)| g <= 1e-15) {
        return Some(Gauge::linear());
    }
    let mut best: Option<(f64, Gauge)> = None;
    for alpha in exponent_grid() {
        let c = SAFETY * rel.iter().map(|&(n, g)| g / n.powf(alpha)).fold(0.0, f64::max);
        let top = c * r_max.powf(alpha);
        if top < 1.0 && best.as_ref().is_none_or(|(b, _)| top < *b) {
            if let Ok(g) = Gauge::monomial(c, alpha) {
                best = Some((top, g));
            }
        }
    }
    best.map(|(_, g)| g)
}

/// Searches monomial gauges for both inclusions and verifies each on fresh
/// samples.
pub fn st_equivalence_search(a: &GermSet, b: &GermSet, p: &InclusionParams) -> Result<STVerdict> {
    if a.dim != b.dim {
        return Err(GermError::Dimension { expected: a.dim, got: b.dim });
    }
    let fresh = InclusionParams { seed: mix_seed(p.seed, 0x5eed), ..*p };
    let mut sides = Vec::new();
    for (label, from, to) in [("B in ST(A)", b, a), ("A in ST(B)", a, b)] {
        let found = dominating_monomial(&relative_distances(from, to, p));
        let theta = found.clone().unwrap_or_else(Gauge::linear);
        let check = st_inclusion_test(from, to, &theta, &fresh)?;
        sides.push((label, found, check));
    }
    let shells_checked = sides.iter().map(|s| s.2.shells_checked).sum();
    let decided = sides.iter().map(|s| s.2.decided).sum();
    let indeterminate = sides.iter().map(|s| s.2.indeterminate).sum();
    let max_ratio = sides.iter().map(|s| s.2.max_ratio).fold(0.0, f64::max);
    let mut v = STVerdict {
        relation: Relation::Equivalent,
        witness_gauges: None,
        counterexamples: Vec::new(),
        max_ratio,
        shells_checked,
        decided,
        indeterminate,
        failed: None,
    };
    let mut failed = Vec::new();
    for (label, found, check) in &sides {
        match (found, check.relation) {
            (_, Relation::Abstain) => v.relation = Relation::Abstain,
            (Some(_), Relation::Included) => {}
            _ => {
                failed.push(*label);
                v.counterexamples.extend(check.counterexamples.iter().cloned());
            }
        }
    }
    if !failed.is_empty() {
        v.relation = Relation::NotEquivalent;
        v.failed = Some(failed.join(", "));
    } else if v.relation == Relation::Equivalent {
        let g = |i: usize| sides[i].1.clone().expect("found");
        v.witness_gauges = Some((g(0), g(1)));
    }
    Ok(v)
}

/// Gauges transported by a bi-Lipschitz map with constants `k1 <= k2`:
/// `h(ST_theta(A)) ⊂ ST_theta1(h(A))` and `ST_theta2(h(A)) ⊂ h(ST_theta(A))`.
pub fn sandwich_gauges(theta: &Gauge, k1: f64, k2: f64) -> Result<(Gauge, Gauge)> {
    if !(k1 > 0.0 && k1 <= k2 && k2.is_finite()) {
        return Err(GermError::Param(format!("need 0 < k1 <= k2, got {k1}, {k2}")));
    }
    Ok((Gauge::scaled(k2 / k1, k1, theta.clone())?, Gauge::scaled(k1 / k2, k2, theta.clone())?))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SideCount {
    pub inside: usize,
    pub outside: usize,
    pub indeterminate: usize,
}

impl SideCount {
    pub fn decided(&self) -> usize {
        self.inside + self.outside
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub k1: f64,
    pub k2: f64,
    pub outer: Gauge,
    pub inner: Gauge,
    /// Images of points of `ST_theta(A)` probed against `ST_outer(h(A))`.
    pub forward: SideCount,
    /// Preimages of points of `ST_inner(h(A))` probed against `ST_theta(A)`;
    /// `None` without an inverse.
    pub backward: Option<SideCount>,
    /// Probed points found outside, in the space where they were probed.
    pub outside_points: Vec<Point>,
}

/// Points of `ST_theta(A)` on the finest `shells` shells: samples of `A`
/// moved by less than the horn width, kept when decided inside.
pub fn horn_samples(a: &GermSet, theta: &Gauge, schedule: &Schedule, shells: usize, per_shell: usize, budget: Budget, seed: u64) -> Vec<Point> {
    let mut rng = rng_for(seed, 0x5a4d);
    let mut out = Vec::new();
    for (j, r) in schedule.finest(shells).into_iter().enumerate() {
        for x in a.sample_shell(r, per_shell, mix_seed(seed, j as u64)) {
            let w = theta.eval_unchecked(norm(&x)) * norm(&x);
            let y = add(&x, &random_in_ball(a.dim, 0.9 * w, &mut rng));
            if st_probe(&y, a, theta, budget, seed).membership == Membership::Inside {
                out.push(y);
            }
        }
    }
    out
}

/// Checks both inclusions of the sandwich gauges of `theta` for a map with
/// constants `k1 <= k2` on sampled points.
pub fn sandwich_check(a: &GermSet, h: &LipschitzMap, theta: &Gauge, (k1, k2): (f64, f64), p: &InclusionParams) -> Result<SandwichReport> {
    let (outer, inner) = sandwich_gauges(theta, k1, k2)?;
    let ha = GermSet::mapped(a.clone(), h.clone())?;
    let mut report =
        SandwichReport { k1, k2, outer: outer.clone(), inner: inner.clone(), forward: SideCount::default(), backward: None, outside_points: Vec::new() };
    let tally = |count: &mut SideCount, pts: Vec<Point>, set: &GermSet, gauge: &Gauge, outside: &mut Vec<Point>| {
        for x in pts {
            match st_probe(&x, set, gauge, p.budget, p.seed).membership {
                Membership::Inside => count.inside += 1,
                Membership::Outside => {
                    count.outside += 1;
                    outside.push(x);
                }
                Membership::Indeterminate => count.indeterminate += 1,
            }
        }
    };
    let forward: Vec<Point> =
        horn_samples(a, theta, &p.schedule, p.finest, p.per_shell, p.budget, p.seed).iter().map(|x| h.apply(x)).collect();
    tally(&mut report.forward, forward, &ha, &outer, &mut report.outside_points);
    if let Some(inv) = h.inverted() {
        let back: Vec<Point> = horn_samples(&ha, &inner, &p.schedule, p.finest, p.per_shell, p.budget, mix_seed(p.seed, 1))
            .iter()
            .map(|y| inv.apply(y))
            .collect();
        let mut count = SideCount::default();
        tally(&mut count, back, a, theta, &mut report.outside_points);
        report.backward = Some(count);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitOutcome {
    Monomial,
    NoMonomialGauge,
    /// `A ⊂ B` on every sample: any gauge works.
    ZeroDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellFit {
    pub radius: f64,
    /// Norm of the sample attaining the maximum.
    pub norm: f64,
    pub max_g: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaugeFit {
    pub outcome: FitOutcome,
    pub gauge: Option<Gauge>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residuals: Vec<f64>,
    pub shells: Vec<ShellFit>,
    /// Inclusion check of the fitted gauge on fresh samples.
    pub certificate: Option<STVerdict>,
}

/// Per-shell maximum of `dist(x, B) / |x|` over samples of `A`, fitted as a
/// power of the norm.
pub fn gauge_fit(a: &GermSet, b: &GermSet, p: &InclusionParams) -> Result<GaugeFit> {
    if a.dim != b.dim {
        return Err(GermError::Dimension { expected: a.dim, got: b.dim });
    }
    let radii = p.schedule.radii();
    let shells: Vec<Option<ShellFit>> = radii
        .par_iter()
        .enumerate()
        .map(|(j, &r)| {
            a.sample_shell(r, p.per_shell, p.seed)
                .into_iter()
                .enumerate()
                .map(|(i, x)| {
                    let n = norm(&x);
                    let d = b.distance_estimate(&x, p.budget, mix_seed(p.seed, (j * 100_003 + i) as u64)).upper;
                    ShellFit { radius: r, norm: n, max_g: d / n }
                })
                .max_by(|u, v| u.max_g.total_cmp(&v.max_g))
        })
        .collect();
    let shells: Vec<ShellFit> = shells.into_iter().flatten().collect();
    if shells.is_empty() {
        return Err(GermError::EmptyGerm(a.name.clone()));
    }
    let mut fit = GaugeFit {
        outcome: FitOutcome::ZeroDistance,
        gauge: None,
        slope: None,
        intercept: None,
        residuals: Vec::new(),
        shells,
        certificate: None,
    };
    let pts: Vec<(f64, f64)> =
        fit.shells.iter().filter(|s| s.max_g > 1e-15).map(|s| (s.norm.ln(), s.max_g.ln())).collect();
    if pts.is_empty() {
        return Ok(fit);
    }
    if pts.len() < 2 {
        return Err(GermError::TooFewPoints { need: 2, got: pts.len() });
    }
    let (slope, intercept) = least_squares(&pts);
    fit.slope = Some(slope);
    fit.intercept = Some(intercept);
    fit.residuals = pts.iter().map(|&(x, y)| y - (intercept + slope * x)).collect();
    if slope <= MIN_SLOPE {
        fit.outcome = FitOutcome::NoMonomialGauge;
        return Ok(fit);
    }
    let gauge = Gauge::monomial_on(SAFETY * intercept.exp(), slope, f64::INFINITY)?;
    let fresh = InclusionParams { seed: mix_seed(p.seed, 0xf17), finest: radii.len(), ..*p };
    fit.certificate = Some(st_inclusion_test(a, b, &gauge, &fresh)?);
    fit.outcome = FitOutcome::Monomial;
    fit.gauge = Some(gauge);
    Ok(fit)
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}
