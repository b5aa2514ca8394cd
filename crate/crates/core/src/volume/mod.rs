//! Monte Carlo volumes of horn neighbourhoods inside small balls and their
//! asymptotic ratios.

mod dims;

pub use dims::{dim_inequality_check, invariant_check, DimInequalityReport, InvariantReport};

use std::sync::OnceLock;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::directions::{direction_set_estimate, DirectionParams};
use crate::error::{GermError, Result};
use crate::gauge::Gauge;
use crate::geom::{ball_volume, dot, mix_seed, normalize, random_in_ball, random_unit, rng_for, scale, unit_sphere_area, Point};
use crate::germ::{Budget, GermSet};
use crate::seatangle::{least_squares, st_probe, Membership};

const BATCH: usize = 8192;
const PILOT: usize = 20_000;
/// Pilot hit rate below which importance sampling takes over.
pub const THIN_HIT_RATE: f64 = 1e-4;
const UNIFORM_WEIGHT: f64 = 0.1;
const MAX_CENTERS: usize = 256;
const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    Uniform,
    Importance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolEstimate {
    pub value: f64,
    /// 95% half-width, inflated by the undecided probes.
    pub ci_halfwidth: f64,
    pub n_samples: usize,
    pub eps: f64,
    pub gauge: Gauge,
    pub seed: u64,
    pub sampler: Sampler,
    pub indeterminate_fraction: f64,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolParams {
    pub samples: usize,
    pub budget: Budget,
    /// Allow the automatic switch to importance sampling.
    pub importance: bool,
    pub seed: u64,
}

impl Default for VolParams {
    fn default() -> Self {
        VolParams { samples: 1_000_000, budget: Budget(256), importance: true, seed: 0 }
    }
}

/// `10^-1, 10^-1.25, ..., 10^-3`.
pub fn default_eps_schedule() -> Vec<f64> {
    (0..9).map(|i| 10f64.powf(-1.0 - 0.25 * i as f64)).collect()
}

/// Area of a cap of angular radius `kappa` on `S^{n-1}`.
fn cap_area(n: usize, kappa: f64) -> f64 {
    match n {
        2 => 2.0 * kappa,
        3 => 2.0 * std::f64::consts::PI * (1.0 - kappa.cos()),
        _ => {
            let m = 2000;
            let h = kappa / m as f64;
            let f = |phi: f64| phi.sin().powi(n as i32 - 2);
            let inner: f64 = (1..m).map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(h * i as f64)).sum();
            unit_sphere_area(n - 1) * h / 3.0 * (f(0.0) + inner + f(kappa))
        }
    }
}

/// Uniform direction in the cap of angular radius `kappa` about `u`.
fn random_in_cap<R: Rng + ?Sized>(u: &[f64], kappa: f64, rng: &mut R) -> Point {
    let n = u.len();
    let top = if kappa >= std::f64::consts::FRAC_PI_2 { 1.0 } else { kappa.sin().powi(n as i32 - 2) };
    let phi = loop {
        let phi = kappa * rng.random::<f64>();
        if n == 2 || rng.random::<f64>() * top <= phi.sin().powi(n as i32 - 2) {
            break phi;
        }
    };
    let w = loop {
        let v = random_unit(n, rng);
        let c = dot(&v, u);
        if let Some(w) = normalize(&v.iter().zip(u).map(|(a, b)| a - c * b).collect::<Vec<_>>()) {
            break w;
        }
    };
    u.iter().zip(&w).map(|(a, b)| phi.cos() * a + phi.sin() * b).collect()
}

/// Mixture proposal: uniform on the ball plus caps around directions of
/// the germ.
struct Proposal {
    n: usize,
    eps: f64,
    centers: Vec<Point>,
    cos_kappa: f64,
    kappa: f64,
    cap_density: f64,
    uniform_density: f64,
}

impl Proposal {
    fn new(n: usize, eps: f64, centers: Vec<Point>, kappa: f64) -> Self {
        let kappa = kappa.min(std::f64::consts::PI);
        Proposal {
            n,
            eps,
            cos_kappa: kappa.cos(),
            kappa,
            cap_density: n as f64 / (eps.powi(n as i32) * cap_area(n, kappa)),
            uniform_density: 1.0 / ball_volume(n, eps),
            centers,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        if rng.random::<f64>() < UNIFORM_WEIGHT {
            return random_in_ball(self.n, self.eps, rng);
        }
        let c = &self.centers[rng.random_range(0..self.centers.len())];
        let s = self.eps * rng.random::<f64>().powf(1.0 / self.n as f64);
        scale(&random_in_cap(c, self.kappa, rng), s)
    }

    fn density(&self, x: &[f64]) -> f64 {
        let u = normalize(x).unwrap_or_else(|| self.centers[0].clone());
        let inside = self.centers.iter().filter(|c| dot(c, &u) >= self.cos_kappa).count();
        UNIFORM_WEIGHT * self.uniform_density
            + (1.0 - UNIFORM_WEIGHT) * self.cap_density * inside as f64 / self.centers.len() as f64
    }
}

/// Volume estimator for one germ; direction centres for the importance
/// sampler are computed on first use.
pub struct VolumeEstimator<'a> {
    germ: &'a GermSet,
    params: VolParams,
    centers: OnceLock<(Vec<Point>, f64)>,
}

#[derive(Default, Clone, Copy)]
struct Sums {
    sum: f64,
    sum_sq: f64,
    undecided: f64,
    undecided_count: usize,
}

impl<'a> VolumeEstimator<'a> {
    pub fn new(germ: &'a GermSet, params: VolParams) -> Self {
        VolumeEstimator { germ, params, centers: OnceLock::new() }
    }

    fn centers(&self) -> &(Vec<Point>, f64) {
        self.centers.get_or_init(|| {
            let p = DirectionParams { seed: self.params.seed, ..DirectionParams::default() };
            match direction_set_estimate(self.germ, &p) {
                Ok(d) => {
                    let mut net = d.net(p.eta / 2.0);
                    if net.len() > MAX_CENTERS {
                        let stride = net.len().div_ceil(MAX_CENTERS);
                        net = net.into_iter().step_by(stride).collect();
                    }
                    (net, p.eta)
                }
                Err(_) => (Vec::new(), p.eta),
            }
        })
    }

    fn membership(&self, x: &[f64], theta: &Gauge, seed: u64) -> Membership {
        st_probe(x, self.germ, theta, self.params.budget, seed).membership
    }

    fn run<F>(&self, theta: &Gauge, n: usize, seed: u64, draw: F) -> Sums
    where
        F: Fn(&mut rand_chacha::ChaCha8Rng) -> (Point, f64) + Sync,
    {
        let batches = n.div_ceil(BATCH);
        let partial: Vec<Sums> = (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = rng_for(seed, b as u64);
                let mut s = Sums::default();
                let count = BATCH.min(n - b * BATCH);
                for i in 0..count {
                    let (x, w) = draw(&mut rng);
                    let v = match self.membership(&x, theta, mix_seed(seed, (b * BATCH + i) as u64)) {
                        Membership::Inside => w,
                        Membership::Outside => 0.0,
                        Membership::Indeterminate => {
                            s.undecided += 0.5 * w;
                            s.undecided_count += 1;
                            0.5 * w
                        }
                    };
                    s.sum += v;
                    s.sum_sq += v * v;
                }
                s
            })
            .collect();
        partial.into_iter().fold(Sums::default(), |a, b| Sums {
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
            undecided: a.undecided + b.undecided,
            undecided_count: a.undecided_count + b.undecided_count,
        })
    }

    /// Volume of `ST_theta(A) ∩ B_eps(0)`.
    pub fn estimate(&self, theta: &Gauge, eps: f64, seed: u64) -> Result<VolEstimate> {
        if !(eps > 0.0 && eps <= theta.t_max()) {
            return Err(GermError::GaugeDomain { t: eps, t_max: theta.t_max() });
        }
        let n_dim = self.germ.dim;
        let ball = ball_volume(n_dim, eps);
        let n = self.params.samples.max(1);
        let uniform = |rng: &mut rand_chacha::ChaCha8Rng| (random_in_ball(n_dim, eps, rng), ball);
        let mut sampler = Sampler::Uniform;
        if self.params.importance {
            let pilot = self.run(theta, PILOT, mix_seed(seed, 0x9170), uniform);
            if pilot.sum / ball < THIN_HIT_RATE * PILOT as f64 && !self.centers().0.is_empty() {
                sampler = Sampler::Importance;
            }
        }
        let sums = match sampler {
            Sampler::Uniform => self.run(theta, n, seed, uniform),
            Sampler::Importance => {
                let (centers, eta) = self.centers();
                let spread = theta.eval_unchecked(eps).min(1.0).asin();
                let q = Proposal::new(n_dim, eps, centers.clone(), 0.5 * eta + 2.0 * spread);
                self.run(theta, n, seed, |rng| {
                    let x = q.sample(rng);
                    let w = 1.0 / q.density(&x);
                    (x, w)
                })
            }
        };
        let nf = n as f64;
        let mean = sums.sum / nf;
        let var = (sums.sum_sq / nf - mean * mean).max(0.0);
        let ci = Z95 * (var / nf).sqrt() + sums.undecided / nf;
        let indeterminate_fraction = sums.undecided_count as f64 / nf;
        Ok(VolEstimate {
            value: mean.clamp(0.0, ball),
            ci_halfwidth: ci,
            n_samples: n,
            eps,
            gauge: theta.clone(),
            seed,
            sampler,
            indeterminate_fraction,
            warning: (indeterminate_fraction > 0.1)
                .then(|| format!("{:.1}% of samples undecided; interval inflated", 100.0 * indeterminate_fraction)),
        })
    }
}

pub fn vol_st_ball(a: &GermSet, theta: &Gauge, eps: f64, samples: usize, seed: u64) -> Result<VolEstimate> {
    VolumeEstimator::new(a, VolParams { samples, seed, ..VolParams::default() }).estimate(theta, eps, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RatioVerdict {
    DecaysToZero,
    Comparable { k: f64 },
    Increases,
    /// A denominator interval contains zero.
    Degenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub eps: f64,
    pub ratio: f64,
    pub ci: f64,
    pub numerator: VolEstimate,
    pub denominator: VolEstimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub verdict: RatioVerdict,
}

/// Minimum run of consecutive monotone points for a trend verdict.
pub const MIN_RUN: usize = 4;
/// Total change a trend must reach.
pub const TREND_FACTOR: f64 = 10.0;

fn longest_run(rows: &[RatioRow], decreasing: bool) -> usize {
    let mut best = 1;
    let mut run = 1;
    for w in rows.windows(2) {
        let slack = w[0].ci + w[1].ci;
        let ok = if decreasing { w[1].ratio <= w[0].ratio + slack } else { w[1].ratio + slack >= w[0].ratio };
        run = if ok { run + 1 } else { 1 };
        best = best.max(run);
    }
    best
}

/// Classifies a ratio curve ordered from large to small radii.
pub fn classify(rows: &[RatioRow]) -> RatioVerdict {
    if rows.is_empty() || rows.iter().any(|r| r.denominator.value - r.denominator.ci_halfwidth <= 0.0) {
        return RatioVerdict::Degenerate;
    }
    let (first, last) = (rows[0].ratio, rows[rows.len() - 1].ratio);
    if rows.len() >= MIN_RUN {
        if longest_run(rows, true) >= MIN_RUN && last * TREND_FACTOR < first {
            return RatioVerdict::DecaysToZero;
        }
        if longest_run(rows, false) >= MIN_RUN && last > TREND_FACTOR * first {
            return RatioVerdict::Increases;
        }
    }
    let hi = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let lo = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    RatioVerdict::Comparable { k: hi.max(1.0 / lo) }
}

fn ratio_rows(
    num: &VolumeEstimator<'_>,
    num_gauge: &Gauge,
    den: &VolumeEstimator<'_>,
    den_gauge: &Gauge,
    eps: &[f64],
    seed: u64,
    common: bool,
) -> Result<RatioReport> {
    let mut rows = Vec::with_capacity(eps.len());
    for (i, &e) in eps.iter().enumerate() {
        let s = mix_seed(seed, i as u64);
        let a = num.estimate(num_gauge, e, s)?;
        let b = den.estimate(den_gauge, e, if common { s } else { mix_seed(s, 1) })?;
        let ratio = a.value / b.value;
        let rel = ((a.ci_halfwidth / a.value).powi(2) + (b.ci_halfwidth / b.value).powi(2)).sqrt();
        rows.push(RatioRow { eps: e, ratio, ci: ratio * rel, numerator: a, denominator: b });
    }
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.ratio > 0.0 && r.ratio.is_finite()).map(|r| (r.eps.ln(), r.ratio.ln())).collect();
    let (slope, intercept) = if pts.len() >= 2 {
        let (s, c) = least_squares(&pts);
        (Some(s), Some(c))
    } else {
        (None, None)
    };
    let verdict = classify(&rows);
    Ok(RatioReport { rows, slope, intercept, verdict })
}

/// `Vol(ST_theta(alpha) ∩ B_eps) / Vol(ST_theta(beta) ∩ B_eps)` over `eps`.
pub fn ratio_curve(alpha: &GermSet, beta: &GermSet, theta: &Gauge, eps: &[f64], p: &VolParams) -> Result<RatioReport> {
    if alpha.dim != beta.dim {
        return Err(GermError::Dimension { expected: alpha.dim, got: beta.dim });
    }
    let a = VolumeEstimator::new(alpha, *p);
    let b = VolumeEstimator::new(beta, *p);
    ratio_rows(&a, theta, &b, theta, eps, p.seed, false)
}

/// `Vol(ST_{c theta}(A) ∩ B_eps) / Vol(ST_theta(A) ∩ B_eps)` over `eps`.
pub fn ctimes_check(a: &GermSet, theta: &Gauge, c: f64, eps: &[f64], p: &VolParams) -> Result<RatioReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(GermError::Param(format!("scale factor must be positive, got {c}")));
    }
    let est = VolumeEstimator::new(a, *p);
    let scaled = theta.times(c)?;
    // common random numbers: both gauges see the same samples
    ratio_rows(&est, &scaled, &est, theta, eps, p.seed, true)
}

/// Volume comparison of the neighbourhoods of two germs under one gauge;
/// comparable is expected for equivalent germs and a gauge above the
/// equivalence witnesses.
pub fn st_volume_equiv_check(a: &GermSet, b: &GermSet, theta: &Gauge, eps: &[f64], p: &VolParams) -> Result<RatioReport> {
    ratio_curve(a, b, theta, eps, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cap_areas() {
        for n in [2usize, 3, 4, 5] {
            assert!((cap_area(n, std::f64::consts::PI) - unit_sphere_area(n)).abs() < 1e-6 * unit_sphere_area(n), "{n}");
        }
        assert!((cap_area(4, 0.3) - 4.0 * std::f64::consts::PI * (0.3 - 0.3f64.sin() * 0.3f64.cos()) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn whole_space_fills_the_ball() {
        let v = vol_st_ball(&GermSet::whole(3), &Gauge::linear(), 0.1, 20_000, 1).unwrap();
        assert!((v.value / ball_volume(3, 0.1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn importance_sampler_is_unbiased_on_a_thin_tube() {
        // z-axis, theta = t, eps = 1e-2: exact value by quadrature of the cap fraction
        let eps = 1e-2;
        let exact = line_oracle(eps, |s| s);
        let axis = GermSet::axis(3, 2);
        let est = VolumeEstimator::new(&axis, VolParams { samples: 200_000, ..VolParams::default() });
        let v = est.estimate(&Gauge::linear(), eps, 4).unwrap();
        assert_eq!(v.sampler, Sampler::Importance);
        assert!((v.value - exact).abs() < 1.5 * v.ci_halfwidth, "{} vs {exact} ± {}", v.value, v.ci_halfwidth);
    }

    fn line_oracle(eps: f64, theta: impl Fn(f64) -> f64) -> f64 {
        let m = 20_000;
        let h = eps / m as f64;
        (0..m)
            .map(|i| {
                let s = h * (i as f64 + 0.5);
                let t = theta(s).min(1.0);
                4.0 * std::f64::consts::PI * s * s * (1.0 - (1.0 - t * t).sqrt()) * h
            })
            .sum()
    }
}
