use serde::{Deserialize, Serialize};

use super::sample::{index_window, parameter_window, project_to_zero_set};
use super::{Branch, GermKind, GermSet};
use crate::geom::{axpy, dist, dist_to_ray, dot, mix_seed, norm, project_to_ray, scale, Point};

/// Evaluation budget for distance estimation (candidate points per level).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget(pub usize);

impl Budget {
    pub const MIN: usize = 64;
}

impl Default for Budget {
    fn default() -> Self {
        Budget(1024)
    }
}

/// `lower <= dist(x, A) <= upper`, with a point of the germ attaining
/// `upper` when one was found.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceBound {
    pub lower: f64,
    pub upper: f64,
    pub witness: Option<Point>,
    /// The interval did not collapse within the budget.
    pub exhausted: bool,
}

impl DistanceBound {
    fn exact(x: &[f64], p: Point) -> Self {
        let d = dist(x, &p);
        DistanceBound { lower: d, upper: d, witness: Some(p), exhausted: false }
    }

    fn merge_level(&mut self, other: DistanceBound) {
        if other.upper < self.upper {
            self.upper = other.upper;
            self.witness = other.witness;
        }
        self.lower = self.lower.max(other.lower);
    }

    fn finish(mut self) -> Self {
        self.lower = self.lower.min(self.upper);
        self.exhausted = self.upper - self.lower > 1e-12 * self.upper.max(f64::MIN_POSITIVE);
        self
    }
}

pub(super) fn subspace_dist(x: &[f64], basis: &[Point]) -> f64 {
    dist(x, &subspace_project(x, basis))
}

fn subspace_project(x: &[f64], basis: &[Point]) -> Point {
    basis.iter().fold(vec![0.0; x.len()], |acc, b| axpy(&acc, dot(x, b), b))
}

/// Nearest point of a cone over unit generators and flat sectors.
pub(super) fn cone_nearest(x: &[f64], generators: &[Point], edges: &[(usize, usize)]) -> (Point, f64) {
    let mut best = (vec![0.0; x.len()], norm(x));
    for g in generators {
        let d = dist_to_ray(x, g);
        if d < best.1 {
            best = (project_to_ray(x, g), d);
        }
    }
    for &(i, j) in edges {
        let (p, q) = (&generators[i], &generators[j]);
        let c = dot(p, q);
        let det = 1.0 - c * c;
        if det < 1e-14 {
            continue;
        }
        let (xp, xq) = (dot(x, p), dot(x, q));
        let s = (xp - c * xq) / det;
        let t = (xq - c * xp) / det;
        if s >= 0.0 && t >= 0.0 {
            let y = axpy(&scale(p, s), t, q);
            let d = dist(x, &y);
            if d < best.1 {
                best = (y, d);
            }
        }
    }
    best
}

pub(super) fn estimate(g: &GermSet, x: &[f64], budget: Budget, seed: u64) -> DistanceBound {
    let r = norm(x);
    // 0 is adherent, so dist(x, A) <= |x|
    let trivial = DistanceBound { lower: 0.0, upper: r, witness: None, exhausted: r > 0.0 };
    if r == 0.0 {
        return DistanceBound { lower: 0.0, upper: 0.0, witness: Some(x.to_vec()), exhausted: false };
    }
    if let Some(f) = &g.nearest {
        return DistanceBound::exact(x, f(x));
    }
    let bound = match &g.kind {
        GermKind::Whole => DistanceBound::exact(x, x.to_vec()),
        GermKind::Subspace { basis } => DistanceBound::exact(x, subspace_project(x, basis)),
        GermKind::Cone { generators, edges, .. } => DistanceBound::exact(x, cone_nearest(x, generators, edges).0),
        GermKind::RadialBands { bands } => {
            let s = bands
                .iter()
                .map(|&(a, b)| r.clamp(a, b))
                .min_by(|a, b| (a - r).abs().total_cmp(&(b - r).abs()))
                .unwrap_or(0.0);
            DistanceBound::exact(x, scale(x, s / r))
        }
        GermKind::Union { parts } => {
            let mut out = trivial.clone();
            out.lower = f64::INFINITY;
            for (i, p) in parts.iter().enumerate() {
                let b = p.distance_estimate(x, budget, mix_seed(seed, i as u64));
                if b.upper < out.upper {
                    out.upper = b.upper;
                    out.witness = b.witness.clone();
                }
                out.lower = out.lower.min(b.lower);
            }
            out
        }
        _ => {
            // nested levels: a larger budget only adds levels, so bounds are
            // monotone in the budget for a fixed seed
            let mut acc = trivial.clone();
            let mut level = Budget::MIN;
            let top = budget.0.max(Budget::MIN);
            let mut k = 0u64;
            while level <= top {
                acc.merge_level(estimate_level(g, x, level, mix_seed(seed, k)));
                if acc.upper - acc.lower <= 1e-12 * acc.upper {
                    break;
                }
                level *= 2;
                k += 1;
            }
            acc
        }
    };
    let mut b = bound;
    if b.upper > r {
        b.upper = r;
        b.witness = None;
    }
    b.finish()
}

fn estimate_level(g: &GermSet, x: &[f64], level: usize, seed: u64) -> DistanceBound {
    let r = norm(x);
    match &g.kind {
        GermKind::Parametric { branches } => {
            let mut out = DistanceBound { lower: r, upper: r, witness: None, exhausted: true };
            for b in branches {
                let (lo, up, w) = branch_bounds(b, x, level);
                out.lower = out.lower.min(lo);
                if up < out.upper {
                    out.upper = up;
                    out.witness = w;
                }
            }
            out
        }
        GermKind::Sequence { term, max_index } => {
            // scan outwards from the index whose norm is closest to |x|;
            // |d(x, a_m)| >= ||a_m| - |x||, so each side stops once that
            // exceeds the best distance found
            let mut out = DistanceBound { lower: 0.0, upper: r, witness: None, exhausted: true };
            let pivot = match index_window(term.as_ref(), *max_index, 0.0, r) {
                Some((m, _)) => m,
                None => *max_index,
            };
            let visit = |m: u64, out: &mut DistanceBound| -> f64 {
                let p = term(m);
                let gap = (norm(&p) - r).abs();
                let d = dist(x, &p);
                if d < out.upper {
                    out.upper = d;
                    out.witness = Some(p);
                }
                gap
            };
            let (mut down, mut up) = (pivot, pivot);
            let (mut down_done, mut up_done) = (false, false);
            let mut frontier = (0.0f64, 0.0f64);
            visit(pivot, &mut out);
            let mut scanned = 1;
            while !(down_done && up_done) && scanned < level {
                if !down_done {
                    if down <= 1 {
                        down_done = true;
                    } else {
                        down -= 1;
                        frontier.0 = visit(down, &mut out);
                        down_done = frontier.0 >= out.upper;
                        scanned += 1;
                    }
                }
                if !up_done {
                    if up >= *max_index {
                        up_done = true;
                    } else {
                        up += 1;
                        frontier.1 = visit(up, &mut out);
                        up_done = frontier.1 >= out.upper;
                        scanned += 1;
                    }
                }
            }
            out.lower = if down_done && up_done {
                out.upper
            } else {
                let mut l = out.upper;
                if !down_done {
                    l = l.min(frontier.0);
                }
                if !up_done {
                    l = l.min(frontier.1);
                }
                l
            };
            out
        }
        GermKind::Algebraic { equations, inequalities } => {
            let feasible = |p: &[f64]| {
                inequalities
                    .iter()
                    .all(|q| q.eval(p) >= -super::EQUATION_TOL * q.magnitude(p))
            };
            let mut cands: Vec<Point> = Vec::new();
            if let Some(p) = project_to_zero_set(equations, x) {
                cands.push(p);
            }
            let per = (level / 8).max(4);
            for j in 0..6 {
                let s = 2.0 * r * 0.5f64.powi(j);
                cands.extend(g.sample_shell(s, per, mix_seed(seed, j as u64)));
            }
            let mut best: Option<(Point, f64)> = None;
            for c in cands.into_iter().filter(|c| feasible(c)) {
                let d = dist(x, &c);
                if best.as_ref().is_none_or(|b| d < b.1) {
                    best = Some((c, d));
                }
            }
            // slide the best candidate towards x along the zero set
            if let Some((mut a, mut d)) = best.clone() {
                if !equations.is_empty() {
                    let mut step = 0.5;
                    for _ in 0..40 {
                        let trial = axpy(&a, step, &crate::geom::sub(x, &a));
                        match project_to_zero_set(equations, &trial) {
                            Some(p) if feasible(&p) && dist(x, &p) < d => {
                                d = dist(x, &p);
                                a = p;
                            }
                            _ => step *= 0.5,
                        }
                        if step < 1e-6 {
                            break;
                        }
                    }
                }
                best = Some((a, d));
            }
            match best {
                Some((p, d)) => DistanceBound { lower: 0.0, upper: d, witness: Some(p), exhausted: true },
                None => DistanceBound { lower: 0.0, upper: r, witness: None, exhausted: true },
            }
        }
        GermKind::Mapped { base, map } => {
            let mut out = DistanceBound { lower: 0.0, upper: r, witness: None, exhausted: true };
            if let Some(y) = map.apply_inverse(x) {
                let b = base.distance_estimate(&y, super::Budget(level), seed);
                if let Some(w) = &b.witness {
                    let hw = map.apply(w);
                    let d = dist(x, &hw);
                    if d < out.upper {
                        out.upper = d;
                        out.witness = Some(hw);
                    }
                }
                if let Some((k1, _)) = map.constants {
                    if norm(&y).max(norm(x)) <= map.region_radius {
                        out.lower = (k1 * b.lower).min(out.upper);
                    }
                }
            } else {
                let per = (level / 8).max(4);
                for j in 0..6 {
                    let s = 2.0 * r * 0.5f64.powi(j);
                    for p in g.sample_shell(s, per, mix_seed(seed, j as u64)) {
                        let d = dist(x, &p);
                        if d < out.upper {
                            out.upper = d;
                            out.witness = Some(p);
                        }
                    }
                }
            }
            out
        }
        _ => unreachable!("exact kinds are handled before levels"),
    }
}

/// Grid search along one branch. Lower bound per grid cell:
/// `(d_i + d_{i+1} - len_i) / 2`, with the arc length `len_i` estimated
/// from four sub-chords.
fn branch_bounds(b: &Branch, x: &[f64], level: usize) -> (f64, f64, Option<Point>) {
    let r = norm(x);
    let u_top = match parameter_window(b, 0.0, 2.0 * r) {
        Some((_, hi)) => hi,
        None => return (r, r, None),
    };
    // points beyond u_top have norm > 2|x|, hence distance > |x|
    let point = |u: f64| if u <= 0.0 { vec![0.0; x.len()] } else { (b.curve)(u) };
    let n = level.max(8);
    let h = u_top / n as f64;
    let pts: Vec<Point> = (0..=n).map(|i| point(h * i as f64)).collect();
    let ds: Vec<f64> = pts.iter().map(|p| dist(x, p)).collect();
    let mut lower = f64::INFINITY;
    for i in 0..n {
        let mut len = 0.0;
        let mut prev = pts[i].clone();
        for k in 1..=4 {
            let q = if k == 4 { pts[i + 1].clone() } else { point(h * (i as f64 + k as f64 / 4.0)) };
            len += dist(&prev, &q);
            prev = q;
        }
        lower = lower.min(0.5 * (ds[i] + ds[i + 1] - len * (1.0 + 1e-9)));
    }
    let (ib, _) = ds.iter().enumerate().fold((0, f64::INFINITY), |acc, (i, &d)| if d < acc.1 { (i, d) } else { acc });
    let lo_u = (h * (ib as f64 - 1.0)).max(0.0);
    let hi_u = (h * (ib as f64 + 1.0)).min(u_top);
    let (u, p) = crate::geom::nearest_on_curve(point, lo_u, hi_u, x, 16);
    let _ = u;
    let up = dist(x, &p).min(ds[ib]);
    let w = if dist(x, &p) <= ds[ib] { p } else { pts[ib].clone() };
    (lower.max(0.0).min(up), up, Some(w))
}
