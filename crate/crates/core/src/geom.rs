//! Small dense-vector helpers, sphere/ball sampling and seed derivation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A point of `R^n`.
pub type Point = Vec<f64>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Point {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Unit vector in the direction of `a`; `None` for the zero vector.
pub fn normalize(a: &[f64]) -> Option<Point> {
    let n = norm(a);
    (n > 0.0 && n.is_finite()).then(|| scale(a, 1.0 / n))
}

/// Distance from `x` to the ray `{t a : t >= 0}` for a unit vector `a`.
pub fn dist_to_ray(x: &[f64], a: &[f64]) -> f64 {
    let s = dot(x, a);
    if s <= 0.0 {
        norm(x)
    } else {
        dist(x, &scale(a, s))
    }
}

/// Nearest point of the ray through the unit vector `a`.
pub fn project_to_ray(x: &[f64], a: &[f64]) -> Point {
    scale(a, dot(x, a).max(0.0))
}

/// Uniform direction on `S^{n-1}`.
pub fn random_unit<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Point {
    loop {
        let g: Point = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if let Some(u) = normalize(&g) {
            return u;
        }
    }
}

/// Uniform point in the ball of radius `r`.
pub fn random_in_ball<R: Rng + ?Sized>(n: usize, r: f64, rng: &mut R) -> Point {
    let u = random_unit(n, rng);
    let s = r * rng.random::<f64>().powf(1.0 / n as f64);
    scale(&u, s)
}

/// Uniform point in the shell `r/2 <= |x| <= r` (volume measure).
pub fn random_in_shell<R: Rng + ?Sized>(n: usize, r: f64, rng: &mut R) -> Point {
    let u = random_unit(n, rng);
    let lo = 0.5f64.powi(n as i32);
    let v: f64 = lo + (1.0 - lo) * rng.random::<f64>();
    scale(&u, r * v.powf(1.0 / n as f64))
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// Surface area of `S^{n-1}`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

pub fn ball_volume(n: usize, r: f64) -> f64 {
    unit_ball_volume(n) * r.powi(n as i32)
}

/// SplitMix64 finalizer; mixes a seed with a stream tag so that derived
/// generators are independent and reproducible.
pub fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(seed, tag))
}

/// Generator for a given shell radius: samplers are pure functions of
/// `(radius, count, seed)`.
pub fn shell_rng(seed: u64, radius: f64) -> ChaCha8Rng {
    rng_for(seed, radius.to_bits())
}

/// Hausdorff distance between two finite clouds (brute force).
pub fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_sided = |p: &[Point], q: &[Point]| {
        p.iter()
            .map(|x| q.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Nearest-point search along a curve `u -> gamma(u)` on `[lo, hi]`: a grid
/// scan followed by golden-section refinement around the best grid cell.
/// Returns `(u*, gamma(u*))`.
pub fn nearest_on_curve<F>(gamma: F, lo: f64, hi: f64, x: &[f64], grid: usize) -> (f64, Point)
where
    F: Fn(f64) -> Point,
{
    let grid = grid.max(4);
    let h = (hi - lo) / grid as f64;
    let d2 = |u: f64| {
        let p = gamma(u);
        p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    };
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..=grid {
        let v = d2(lo + h * i as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut a = (lo + h * (best_i as f64 - 1.0)).max(lo);
    let mut b = (lo + h * (best_i as f64 + 1.0)).min(hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (d2(c), d2(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = d2(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = d2(d);
        }
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
    }
    let mut u = 0.5 * (a + b);
    // the refined point must not be worse than the grid winner
    let grid_u = lo + h * best_i as f64;
    if d2(u) > best {
        u = grid_u;
    }
    (u, gamma(u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn shell_samples_have_shell_norms() {
        let mut rng = rng_for(7, 1);
        for n in 1..5 {
            for _ in 0..200 {
                let x = random_in_shell(n, 0.3, &mut rng);
                let r = norm(&x);
                assert!((0.15 - 1e-15..=0.3 + 1e-15).contains(&r));
            }
        }
    }

    #[test]
    fn ray_distance() {
        let a = [1.0, 0.0];
        assert_eq!(dist_to_ray(&[2.0, 1.0], &a), 1.0);
        assert_eq!(dist_to_ray(&[-3.0, 4.0], &a), 5.0);
    }

    #[test]
    fn curve_search_finds_parabola_foot() {
        // nearest point of y = x^2 to (0, 1): x = +-1/sqrt(2)
        let (u, p) = nearest_on_curve(|u| vec![u, u * u], -2.0, 2.0, &[0.0, 1.0], 64);
        assert!((u.abs() - 0.5f64.sqrt()).abs() < 1e-7);
        assert!((dist(&p, &[0.0, 1.0]) - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn seeds_are_stable() {
        assert_eq!(mix_seed(1, 2), mix_seed(1, 2));
        assert_ne!(mix_seed(1, 2), mix_seed(1, 3));
    }
}
