//! Direction sets: limit directions `x/|x|` of a germ, their clusters, a
//! statistical dimension estimate and the tangent cone they generate.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};
use crate::geom::{dist, hausdorff, normalize, Point};
use crate::germ::{GermSet, Schedule};

/// Minimum cloud size for a dimension estimate.
pub const MIN_POINTS: usize = 50;
const KNN_FALLBACK: usize = 12;
const RANK_THRESHOLD: f64 = 0.1;
const MAX_ANCHORS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionParams {
    pub schedule: Schedule,
    pub per_shell: usize,
    /// Linking scale on the sphere.
    pub eta: f64,
    /// How many of the finest nonempty shells enter the estimate.
    pub active_shells: usize,
    pub seed: u64,
}

impl Default for DirectionParams {
    fn default() -> Self {
        DirectionParams { schedule: Schedule::default(), per_shell: 200, eta: 0.05, active_shells: 2, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimEstimate {
    pub dim: i32,
    pub confidence: f64,
    pub low_confidence: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionSample {
    pub dim: usize,
    pub points: Vec<Point>,
    pub radii: Vec<f64>,
    pub shell: Vec<usize>,
    /// Points from the finest shells; the others are diagnostics.
    pub active: Vec<bool>,
    /// Cluster label of each active point (`None` for inactive ones).
    pub clusters: Vec<Option<usize>>,
    pub n_clusters: usize,
    pub eta: f64,
    /// Hausdorff distance between the two finest nonempty shell clouds.
    pub drift: Option<f64>,
    pub unstable: bool,
    pub estimate: DimEstimate,
}

impl DirectionSample {
    /// Wraps an explicit cloud of unit vectors, all active.
    pub fn from_points(dim: usize, points: Vec<Point>, eta: f64) -> Result<Self> {
        let n = points.len();
        let mut s = DirectionSample {
            dim,
            radii: vec![1.0; n],
            shell: vec![0; n],
            active: vec![true; n],
            clusters: vec![None; n],
            n_clusters: 0,
            points,
            eta,
            drift: None,
            unstable: false,
            estimate: DimEstimate { dim: -1, confidence: 0.0, low_confidence: true },
        };
        s.finish()?;
        Ok(s)
    }

    fn finish(&mut self) -> Result<()> {
        let act = self.active_points();
        let labels = single_linkage(&act, self.eta);
        self.n_clusters = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut it = labels.into_iter();
        self.clusters = self.active.iter().map(|&a| if a { it.next() } else { None }).collect();
        self.estimate = if act.is_empty() {
            DimEstimate { dim: -1, confidence: 1.0, low_confidence: false }
        } else {
            let shells: Vec<usize> = self.indices_active().map(|i| self.shell[i]).collect();
            estimate_dim(&act, &shells, self.eta)
        };
        Ok(())
    }

    fn indices_active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.points.len()).filter(|&i| self.active[i])
    }

    pub fn active_points(&self) -> Vec<Point> {
        self.indices_active().map(|i| self.points[i].clone()).collect()
    }

    /// One representative (the first member) per cluster.
    pub fn representatives(&self) -> Vec<Point> {
        let mut reps: Vec<Option<Point>> = vec![None; self.n_clusters];
        for (i, c) in self.clusters.iter().enumerate() {
            if let Some(c) = c {
                reps[*c].get_or_insert_with(|| self.points[i].clone());
            }
        }
        reps.into_iter().flatten().collect()
    }

    /// Greedy net of the active cloud with spacing `spacing`.
    pub fn net(&self, spacing: f64) -> Vec<Point> {
        let mut net: Vec<Point> = Vec::new();
        for p in self.active_points() {
            if net.iter().all(|q| dist(&p, q) > spacing) {
                net.push(p);
            }
        }
        net
    }
}

/// Samples each shell, normalizes, clusters the finest shells and
/// estimates the dimension.
pub fn direction_set_estimate(a: &GermSet, p: &DirectionParams) -> Result<DirectionSample> {
    if !(p.eta > 0.0 && p.eta < 2.0) {
        return Err(GermError::Param(format!("linking scale must be in (0, 2), got {}", p.eta)));
    }
    let radii = p.schedule.radii();
    let shells: Vec<Vec<Point>> = radii
        .par_iter()
        .map(|&r| {
            a.sample_shell(r, p.per_shell, p.seed)
                .iter()
                .filter_map(|x| normalize(x))
                .collect()
        })
        .collect();
    let nonempty: Vec<usize> = (0..shells.len()).filter(|&j| !shells[j].is_empty()).collect();
    if nonempty.is_empty() {
        return Err(GermError::EmptyGerm(a.name.clone()));
    }
    let keep = p.active_shells.max(1);
    let active_set: Vec<usize> = nonempty[nonempty.len().saturating_sub(keep)..].to_vec();
    let drift = match nonempty.len() {
        0 | 1 => None,
        n => Some(hausdorff(&shells[nonempty[n - 2]], &shells[nonempty[n - 1]])),
    };
    let mut s = DirectionSample {
        dim: a.dim,
        points: Vec::new(),
        radii: Vec::new(),
        shell: Vec::new(),
        active: Vec::new(),
        clusters: Vec::new(),
        n_clusters: 0,
        eta: p.eta,
        drift,
        unstable: drift.is_some_and(|d| d > p.eta),
        estimate: DimEstimate { dim: -1, confidence: 0.0, low_confidence: true },
    };
    for (j, cloud) in shells.into_iter().enumerate() {
        for x in cloud {
            s.points.push(x);
            s.radii.push(radii[j]);
            s.shell.push(j);
            s.active.push(active_set.contains(&j));
        }
    }
    s.finish()?;
    Ok(s)
}

/// Single-linkage cluster labels at scale `eta`.
pub fn single_linkage(points: &[Point], eta: f64) -> Vec<usize> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist(&points[i], &points[j]) <= eta {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let root = find(&mut parent, i);
        if label[root] == usize::MAX {
            label[root] = next;
            next += 1;
        }
        out.push(label[root]);
    }
    out
}

fn cluster_diameters(points: &[Point], labels: &[usize]) -> Vec<f64> {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut diam = vec![0.0f64; k];
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            if labels[i] == labels[j] {
                diam[labels[i]] = diam[labels[i]].max(dist(&points[i], &points[j]));
            }
        }
    }
    diam
}

/// Largest cluster diameter of a cloud clustered at `eta`.
pub fn max_cluster_diameter(points: &[Point], eta: f64) -> f64 {
    let labels = single_linkage(points, eta);
    cluster_diameters(points, &labels).into_iter().fold(0.0, f64::max)
}

/// Rank of the local covariance of `pts` (eigenvalues above a fraction of
/// the largest).
fn local_rank(pts: &[&Point]) -> usize {
    let n = pts[0].len();
    let k = pts.len() as f64;
    let mean: Vec<f64> = (0..n).map(|d| pts.iter().map(|p| p[d]).sum::<f64>() / k).collect();
    let cov = DMatrix::from_fn(n, n, |a, b| pts.iter().map(|p| (p[a] - mean[a]) * (p[b] - mean[b])).sum::<f64>() / k);
    let eig = SymmetricEigen::new(cov).eigenvalues;
    let top = eig.iter().copied().fold(0.0, f64::max);
    if top <= 1e-30 {
        return 0;
    }
    eig.iter().filter(|&&l| l >= RANK_THRESHOLD * top).count()
}

/// Majority vote of local ranks at neighbourhood scale `s`; returns the
/// winning rank and its vote share.
pub fn pca_vote(points: &[Point], s: f64) -> (usize, f64) {
    let n = points.len();
    let stride = n.div_ceil(MAX_ANCHORS).max(1);
    let anchors: Vec<usize> = (0..n).step_by(stride).collect();
    let ranks: Vec<usize> = anchors
        .par_iter()
        .map(|&i| {
            let mut by_dist: Vec<(f64, usize)> = (0..n).map(|j| (dist(&points[i], &points[j]), j)).collect();
            by_dist.sort_by(|a, b| a.0.total_cmp(&b.0));
            let within = by_dist.iter().take_while(|(d, _)| *d <= s).count();
            let take = within.max(KNN_FALLBACK.min(n));
            let nb: Vec<&Point> = by_dist[..take].iter().map(|&(_, j)| &points[j]).collect();
            local_rank(&nb)
        })
        .collect();
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    let mut votes = vec![0usize; max_rank + 1];
    ranks.iter().for_each(|&r| votes[r] += 1);
    let (best, count) = votes.iter().enumerate().max_by_key(|&(r, &c)| (c, std::cmp::Reverse(r))).unwrap_or((0, &0));
    (best, *count as f64 / ranks.len().max(1) as f64)
}

/// Dimension of a direction cloud. `shells` gives each point's shell so
/// that zero-dimensional clusters can be checked for shrinking.
pub fn estimate_dim(points: &[Point], shells: &[usize], eta: f64) -> DimEstimate {
    if points.is_empty() {
        return DimEstimate { dim: -1, confidence: 1.0, low_confidence: false };
    }
    let labels = single_linkage(points, eta);
    let diam = cluster_diameters(points, &labels);
    let max_diam = diam.iter().copied().fold(0.0, f64::max);
    let finitely_many = diam.len() * 10 <= points.len().max(10);
    if max_diam <= eta / 2.0 && finitely_many {
        // clusters must not grow from the coarser to the finer shell
        let mut shrinking = true;
        let finest = shells.iter().copied().max().unwrap_or(0);
        let coarser = shells.iter().copied().filter(|&s| s < finest).max();
        if let Some(coarse) = coarser {
            for c in 0..diam.len() {
                let pick = |sh: usize| -> Vec<Point> {
                    (0..points.len()).filter(|&i| labels[i] == c && shells[i] == sh).map(|i| points[i].clone()).collect()
                };
                let (f, g) = (pick(finest), pick(coarse));
                let df = max_cluster_diameter(&f, f64::INFINITY);
                let dg = max_cluster_diameter(&g, f64::INFINITY);
                if df > 1.5 * dg.max(1e-6) {
                    shrinking = false;
                }
            }
        }
        let stable = max_cluster_diameter(points, eta / 2.0) <= eta / 4.0;
        let confidence = if shrinking && stable { 1.0 } else { 0.5 };
        return DimEstimate { dim: 0, confidence, low_confidence: confidence < 0.8 };
    }
    let (d1, s1) = pca_vote(points, eta);
    let (d2, s2) = pca_vote(points, eta / 2.0);
    let confidence = if d1 == d2 { 0.5 * (s1 + s2) } else { 0.5 * s1.min(s2) };
    DimEstimate { dim: d1 as i32, confidence, low_confidence: confidence < 0.8 }
}

/// `dim` of a direction sample, requiring at least [`MIN_POINTS`] points.
pub fn dimension_estimate(d: &DirectionSample) -> Result<DimEstimate> {
    let n = d.active.iter().filter(|&&a| a).count();
    if n < MIN_POINTS {
        return Err(GermError::TooFewPoints { need: MIN_POINTS, got: n });
    }
    Ok(d.estimate)
}

/// The cone over the sample: a net of the active cloud with sectors
/// between net points of the same cluster closer than `eta`.
pub fn tangent_cone(d: &DirectionSample) -> Result<GermSet> {
    let pts = d.active_points();
    if pts.is_empty() {
        return Err(GermError::Param("tangent cone of an empty direction sample".into()));
    }
    let net = d.net(d.eta / 2.0);
    let labels = single_linkage(&net, d.eta);
    let mut edges = Vec::new();
    for i in 0..net.len() {
        for j in (i + 1)..net.len() {
            let gap = dist(&net[i], &net[j]);
            if labels[i] == labels[j] && gap <= d.eta && gap > 0.0 {
                edges.push((i, j));
            }
        }
    }
    GermSet::cone("LD", net, edges, d.eta)
}

/// Points of each cloud within `scale` of the other cloud.
pub fn intersect_clouds(a: &[Point], b: &[Point], scale: f64) -> Vec<Point> {
    let near = |p: &Point, cloud: &[Point]| cloud.iter().any(|q| dist(p, q) <= scale);
    a.iter().filter(|p| near(p, b)).chain(b.iter().filter(|p| near(p, a))).cloned().collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectionReport {
    pub dim: i32,
    pub confidence: f64,
    pub points_at_eta: usize,
    pub points_at_half_eta: usize,
    /// Points matched at `eta/2` over points matched at `eta`.
    pub count_ratio: Option<f64>,
    /// Largest cluster diameter at `eta/2` over that at `eta` (diagnostic).
    pub diameter_ratio: Option<f64>,
    pub unstable: bool,
}

/// Count ratio at or below which an intersection counts as isolated points:
/// near a transversal contact the matched points halve with the scale,
/// along a shared curve or surface they do not.
pub const SHRINK_RATIO: f64 = 0.75;

/// `dim(D(A) ∩ D(B))` from two clouds, `-1` for an empty intersection.
pub fn intersection_dim_of_clouds(a: &[Point], b: &[Point], eta: f64) -> IntersectionReport {
    let at_eta = intersect_clouds(a, b, eta);
    let at_half = intersect_clouds(a, b, eta / 2.0);
    let mut rep = IntersectionReport {
        dim: -1,
        confidence: 1.0,
        points_at_eta: at_eta.len(),
        points_at_half_eta: at_half.len(),
        count_ratio: None,
        diameter_ratio: None,
        unstable: false,
    };
    if at_eta.is_empty() {
        return rep;
    }
    let d_eta = max_cluster_diameter(&at_eta, eta);
    if d_eta <= eta / 2.0 {
        rep.dim = 0;
        return rep;
    }
    let d_half = if at_half.is_empty() { 0.0 } else { max_cluster_diameter(&at_half, eta) };
    rep.diameter_ratio = Some(d_half / d_eta);
    let ratio = at_half.len() as f64 / at_eta.len() as f64;
    rep.count_ratio = Some(ratio);
    if ratio <= SHRINK_RATIO {
        rep.dim = 0;
        return rep;
    }
    // Each one-sided match lies inside its own set, so the smaller estimate
    // is the tighter bound on the intersection.
    let near = |from: &[Point], to: &[Point]| -> Vec<Point> {
        from.iter().filter(|p| to.iter().any(|q| dist(p, q) <= eta)).cloned().collect()
    };
    let est = [near(a, b), near(b, a)]
        .iter()
        .filter(|side| !side.is_empty())
        .map(|side| estimate_dim(side, &vec![0; side.len()], eta))
        .min_by(|x, y| x.dim.cmp(&y.dim).then(y.confidence.total_cmp(&x.confidence)))
        .expect("a nonempty match has a nonempty side");
    rep.dim = est.dim;
    rep.confidence = est.confidence;
    rep
}

pub fn direction_intersection_dim(a: &GermSet, b: &GermSet, p: &DirectionParams) -> Result<IntersectionReport> {
    if a.dim != b.dim {
        return Err(GermError::Dimension { expected: a.dim, got: b.dim });
    }
    let da = direction_set_estimate(a, p)?;
    let db = direction_set_estimate(b, &DirectionParams { seed: crate::geom::mix_seed(p.seed, 1), ..*p })?;
    let mut rep = intersection_dim_of_clouds(&da.active_points(), &db.active_points(), p.eta);
    rep.unstable = da.unstable || db.unstable;
    Ok(rep)
}

/// Local-PCA dimension of the germ itself on one shell, with neighbourhoods
/// of the 16 nearest points.
pub fn sampled_dimension(a: &GermSet, r: f64, count: usize, seed: u64) -> Result<usize> {
    let pts: Vec<Point> = a.sample_shell(r, count, seed).iter().map(|x| crate::geom::scale(x, 1.0 / r)).collect();
    if pts.len() < MIN_POINTS {
        return Err(GermError::TooFewPoints { need: MIN_POINTS, got: pts.len() });
    }
    Ok(pca_vote(&pts, 0.0).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{horn, round_cone};
    use crate::geom::{random_unit, rng_for};

    #[test]
    fn horn_has_two_antipodal_point_directions() {
        let d = direction_set_estimate(&horn(), &DirectionParams::default()).unwrap();
        assert_eq!(d.estimate.dim, 0);
        assert!(d.estimate.confidence >= 0.8);
        let reps = d.representatives();
        assert_eq!(reps.len(), 2);
        for r in reps {
            assert!((r[2].abs() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn round_cone_directions_are_one_dimensional() {
        let d = direction_set_estimate(&round_cone(2), &DirectionParams::default()).unwrap();
        assert_eq!(d.estimate.dim, 1);
        assert!(d.estimate.confidence >= 0.8, "{:?}", d.estimate);
    }

    #[test]
    fn sphere_clouds_have_their_dimension() {
        let mut rng = rng_for(1, 1);
        let s2: Vec<Point> = (0..600).map(|_| random_unit(3, &mut rng)).collect();
        assert_eq!(DirectionSample::from_points(3, s2, 0.05).unwrap().estimate.dim, 2);
        let s1: Vec<Point> = (0..400)
            .map(|_| {
                let u = random_unit(2, &mut rng);
                vec![u[0], 0.0, u[1], 0.0]
            })
            .collect();
        assert_eq!(DirectionSample::from_points(4, s1, 0.05).unwrap().estimate.dim, 1);
        let s0: Vec<Point> = (0..100).map(|i| if i % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, -1.0] }).collect();
        assert_eq!(DirectionSample::from_points(2, s0, 0.05).unwrap().estimate.dim, 0);
    }

    #[test]
    fn ray_gives_one_cluster_and_cone_of_it_is_the_ray() {
        let a = GermSet::ray("ray", &[0.6, 0.8]).unwrap();
        let d = direction_set_estimate(&a, &DirectionParams::default()).unwrap();
        assert_eq!(d.n_clusters, 1);
        let cone = tangent_cone(&d).unwrap();
        assert!(cone.contains(&[0.06, 0.08], 1e-12));
        assert!(!cone.contains(&[0.08, 0.06], 1e-12));
    }

    #[test]
    fn intersections() {
        let p = DirectionParams::default();
        let x = GermSet::axis(2, 0);
        let y = GermSet::axis(2, 1);
        assert_eq!(direction_intersection_dim(&x, &y, &p).unwrap().dim, -1);
        assert_eq!(direction_intersection_dim(&horn(), &horn(), &p).unwrap().dim, 0);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let d = DirectionSample::from_points(2, vec![vec![1.0, 0.0]; 10], 0.05).unwrap();
        assert!(dimension_estimate(&d).is_err());
    }
}
