use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Branch, GermKind, GermSet, EQUATION_TOL};
use crate::geom::{axpy, mix_seed, norm, normalize, random_in_shell, random_unit, rng_for, scale, Point};
use crate::poly::Poly;

fn in_shell(x: &[f64], r: f64) -> bool {
    let n = norm(x);
    0.5 * r <= n && n <= r
}

pub(super) fn sample_shell(g: &GermSet, r: f64, count: usize, seed: u64) -> Vec<Point> {
    if !(r > 0.0 && r.is_finite()) || count == 0 {
        return Vec::new();
    }
    let mut rng = rng_for(mix_seed(seed, 0x5eed), r.to_bits());
    let n = g.dim;
    match &g.kind {
        GermKind::Whole => (0..count).map(|_| random_in_shell(n, r, &mut rng)).collect(),
        GermKind::Subspace { basis } => (0..count)
            .map(|_| {
                let c = random_in_shell(basis.len(), r, &mut rng);
                basis.iter().zip(&c).fold(vec![0.0; n], |acc, (b, ci)| axpy(&acc, *ci, b))
            })
            .collect(),
        GermKind::Cone { generators, edges, .. } => (0..count)
            .map(|_| {
                let s = r * (0.5 + 0.5 * rng.random::<f64>());
                let dir = if !edges.is_empty() && rng.random::<bool>() {
                    let (i, j) = edges[rng.random_range(0..edges.len())];
                    let w = rng.random::<f64>();
                    let mix = axpy(&scale(&generators[i], 1.0 - w), w, &generators[j]);
                    normalize(&mix).unwrap_or_else(|| generators[i].clone())
                } else {
                    generators[rng.random_range(0..generators.len())].clone()
                };
                scale(&dir, s)
            })
            .filter(|x| in_shell(x, r))
            .collect(),
        GermKind::RadialBands { bands } => {
            let pieces: Vec<(f64, f64)> = bands
                .iter()
                .map(|&(a, b)| (a.max(0.5 * r), b.min(r)))
                .filter(|(a, b)| a <= b)
                .collect();
            let total: f64 = pieces.iter().map(|(a, b)| b - a).sum();
            if pieces.is_empty() {
                return Vec::new();
            }
            (0..count)
                .map(|_| {
                    let mut t = rng.random::<f64>() * total;
                    let mut s = pieces[0].0;
                    for &(a, b) in &pieces {
                        if t <= b - a {
                            s = a + t;
                            break;
                        }
                        t -= b - a;
                        s = b;
                    }
                    scale(&random_unit(n, &mut rng), s)
                })
                .collect()
        }
        GermKind::Algebraic { equations, inequalities } => {
            sample_algebraic(n, equations, inequalities, r, count, &mut rng)
        }
        GermKind::Parametric { branches } => sample_parametric(branches, r, count, &mut rng),
        GermKind::Sequence { term, max_index } => {
            let Some((lo, hi)) = index_window(term.as_ref(), *max_index, 0.5 * r, r) else {
                return Vec::new();
            };
            let span = hi - lo + 1;
            let idx: Vec<u64> = if span <= count as u64 {
                (lo..=hi).collect()
            } else {
                (0..count).map(|_| rng.random_range(lo..=hi)).collect()
            };
            idx.into_iter().map(|m| term(m)).filter(|x| in_shell(x, r)).collect()
        }
        GermKind::Mapped { base, map } => {
            let radii: Vec<f64> = match map.constants {
                Some((k1, k2)) if 2.0 * r / k1 <= map.region_radius => {
                    let (hi, lo) = (2.0 * r / k1, 0.5 * r / k2);
                    let mut v = vec![hi];
                    while *v.last().unwrap() > lo {
                        let last = *v.last().unwrap();
                        v.push(last * std::f64::consts::FRAC_1_SQRT_2);
                    }
                    v
                }
                _ => match preimage_radius(base, map, r, seed) {
                    Some(s) => (-6..=3).map(|j| s * 2f64.powf(j as f64 / 2.0)).collect(),
                    None => return Vec::new(),
                },
            };
            let mut out = Vec::with_capacity(count);
            for round in 0..8u64 {
                let per = (2 * count).div_ceil(radii.len()).max(2) << round;
                for (k, &s) in radii.iter().enumerate() {
                    for p in base.sample_shell(s, per, mix_seed(seed, 31 * round + k as u64)) {
                        let q = map.apply(&p);
                        if in_shell(&q, r) {
                            out.push(q);
                        }
                    }
                }
                if out.len() >= count {
                    break;
                }
            }
            out.shuffle(&mut rng);
            out.truncate(count);
            out
        }
        GermKind::Union { parts } => {
            let mut out: Vec<Point> = parts
                .iter()
                .enumerate()
                .flat_map(|(i, p)| p.sample_shell(r, count, mix_seed(seed, i as u64 + 1)))
                .collect();
            out.shuffle(&mut rng);
            out.truncate(count);
            out
        }
    }
}

/// A base radius whose image has typical norm about `0.75 r`, found by
/// bisection on `log s`; used when the map has no claimed constants.
fn preimage_radius(base: &GermSet, map: &crate::lipschitz::LipschitzMap, r: f64, seed: u64) -> Option<f64> {
    let typical = |s: f64| -> Option<f64> {
        let pts = base.sample_shell(s, 16, mix_seed(seed, 0xbead));
        if pts.is_empty() {
            return None;
        }
        let mut v: Vec<f64> = pts.iter().map(|p| norm(&map.apply(p))).collect();
        v.sort_by(f64::total_cmp);
        Some(v[v.len() / 2])
    };
    let target = 0.75 * r;
    let (mut lo, mut hi) = ((r * 1e-12).ln(), (r * 1e12).min(1e6).ln());
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        match typical(mid.exp()) {
            Some(v) if v < target => lo = mid,
            Some(_) => hi = mid,
            None => lo = mid,
        }
    }
    let s = (0.5 * (lo + hi)).exp();
    typical(s).map(|_| s)
}

/// Gauss-Newton with least-norm steps onto the common zero set.
pub fn project_to_zero_set(equations: &[Poly], x0: &[f64]) -> Option<Point> {
    let n = x0.len();
    let m = equations.len();
    let mut x = x0.to_vec();
    for _ in 0..300 {
        let f: Vec<f64> = equations.iter().map(|p| p.eval(&x)).collect();
        let converged = equations
            .iter()
            .zip(&f)
            .all(|(p, v)| v.abs() <= 1e-3 * EQUATION_TOL * p.magnitude(&x));
        if converged {
            return Some(x);
        }
        let mut j = DMatrix::zeros(m, n);
        for (i, p) in equations.iter().enumerate() {
            for (k, gk) in p.gradient(&x).into_iter().enumerate() {
                j[(i, k)] = gk;
            }
        }
        let jjt = &j * j.transpose();
        let rhs = DVector::from_vec(f);
        let y = jjt.clone().lu().solve(&rhs).or_else(|| jjt.pseudo_inverse(1e-300).ok().map(|p| p * &rhs))?;
        let step = j.transpose() * y;
        if step.iter().any(|v| !v.is_finite()) {
            return None;
        }
        x.iter_mut().zip(step.iter()).for_each(|(xi, si)| *xi -= si);
        if step.norm() <= 1e-17 * norm(&x) {
            break;
        }
    }
    let ok = equations.iter().all(|p| p.eval(&x).abs() <= EQUATION_TOL * p.magnitude(&x));
    ok.then_some(x)
}

fn sample_algebraic(
    n: usize,
    equations: &[Poly],
    inequalities: &[Poly],
    r: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Point> {
    let mut out = Vec::with_capacity(count);
    let max_attempts = 200 * count + 1000;
    for _ in 0..max_attempts {
        if out.len() >= count {
            break;
        }
        let x0 = random_in_shell(n, r, rng);
        let x = if equations.is_empty() {
            Some(x0)
        } else {
            project_to_zero_set(equations, &x0)
        };
        let Some(x) = x else { continue };
        let feasible = inequalities.iter().all(|p| p.eval(&x) >= -EQUATION_TOL * p.magnitude(&x));
        if feasible && in_shell(&x, r) && norm(&x) > 0.0 {
            out.push(x);
        }
    }
    out
}

/// The parameter interval on which `|curve(u)|` lies in `[lo, hi]`, by
/// bisection on the (assumed increasing) norm.
pub(super) fn parameter_window(b: &Branch, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let nrm = |u: f64| norm(&(b.curve)(u));
    if nrm(b.u_max) < lo {
        return None;
    }
    let first_at_least = |target: f64| -> f64 {
        if nrm(b.u_max) < target {
            return b.u_max;
        }
        let (mut a, mut c) = (0.0, b.u_max);
        for _ in 0..200 {
            let m = 0.5 * (a + c);
            if m <= a || m >= c {
                break;
            }
            if nrm(m) < target {
                a = m;
            } else {
                c = m;
            }
        }
        c
    };
    let u_lo = first_at_least(lo);
    let u_hi = if nrm(b.u_max) <= hi { b.u_max } else { first_at_least(hi) };
    (u_lo <= u_hi).then_some((u_lo, u_hi))
}

fn sample_parametric(branches: &[Branch], r: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let windows: Vec<(usize, f64, f64)> = branches
        .iter()
        .enumerate()
        .filter_map(|(i, b)| parameter_window(b, 0.5 * r, r).map(|(a, c)| (i, a, c)))
        .collect();
    if windows.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..4 * count {
        if out.len() >= count {
            break;
        }
        let (i, a, c) = windows[rng.random_range(0..windows.len())];
        let u = a + (c - a) * rng.random::<f64>();
        let x = (branches[i].curve)(u);
        if in_shell(&x, r) {
            out.push(x);
        }
    }
    out
}

/// Indices `m` with `lo <= |term(m)| <= hi`, assuming norms decrease in `m`.
pub(super) fn index_window(term: &(dyn Fn(u64) -> Point + Send + Sync), max_index: u64, lo: f64, hi: f64) -> Option<(u64, u64)> {
    let nrm = |m: u64| norm(&term(m));
    // first index whose norm is below `target`
    let first_below = |target: f64, strict: bool| -> Option<u64> {
        let ok = |m: u64| if strict { nrm(m) < target } else { nrm(m) <= target };
        if ok(1) {
            return Some(1);
        }
        let (mut bad, mut good) = (1u64, 2u64.min(max_index));
        while !ok(good) {
            if good >= max_index {
                return None;
            }
            bad = good;
            good = good.saturating_mul(2).min(max_index);
        }
        while good - bad > 1 {
            let mid = bad + (good - bad) / 2;
            if ok(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        Some(good)
    };
    let start = first_below(hi, false)?;
    let end = match first_below(lo, true) {
        Some(m) => m.checked_sub(1)?,
        None => max_index,
    };
    (start <= end && nrm(start) >= lo).then_some((start, end))
}
