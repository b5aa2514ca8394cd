use std::sync::Arc;

use serde::Serialize;

use super::{ConstantSource, LipschitzMap, PointFn};
use crate::error::{GermError, Result};
use crate::geom::{dist, norm, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeBounds {
    /// Bi-Lipschitz constant of the base map on the samples.
    pub c: f64,
    /// `sup |h(x)|` and `sup |x|` over the base samples.
    pub image_radius: f64,
    pub base_radius: f64,
    /// `|h*(p) - h*(q)| <= c' (|t - t'| + |tx - t'x'|)`.
    pub c_forward: f64,
    pub c_inverse: f64,
}

/// Checks `q / c <= |h(x) - h(y)| / |x - y| <= c q` on all sample pairs.
fn validate(h: &LipschitzMap, samples: &[Point], c: f64) -> Result<()> {
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let d = dist(&samples[i], &samples[j]);
            if d == 0.0 {
                continue;
            }
            let q = dist(&h.apply(&samples[i]), &h.apply(&samples[j])) / d;
            if q > c * (1.0 + 1e-9) || q < (1.0 - 1e-9) / c {
                return Err(GermError::ConstantViolation {
                    x: samples[i].clone(),
                    y: samples[j].clone(),
                    quotient: q,
                    bound: c,
                });
            }
        }
    }
    Ok(())
}

/// Lifts `(y, t) -> (t h(y / t), t)` with the same rule for the inverse.
fn lift(f: PointFn, n: usize) -> PointFn {
    Arc::new(move |p: &[f64]| {
        let t = p[n];
        if t == 0.0 {
            return vec![0.0; p.len()];
        }
        let base: Point = p[..n].iter().map(|v| v / t).collect();
        let mut out: Point = f(&base).into_iter().map(|v| t * v).collect();
        out.push(t);
        out
    })
}

/// The cone extension over a base `X1` at height 1, given by samples of
/// `X1`. With `M = sup |h|` and `X = sup |x|` the difference of images is
/// bounded by `(1 + M + cX) |t - t'| + c |tx - t'x'|`, so the forward
/// constant is at most `sqrt(2) max(1 + M + cX, c)`; the inverse uses the
/// same chain with the roles of the radii swapped.
pub fn cone_extension(h: &LipschitzMap, base_samples: &[Point], c: f64) -> Result<(LipschitzMap, ConeBounds)> {
    if h.dim_in != h.dim_out {
        return Err(GermError::Dimension { expected: h.dim_in, got: h.dim_out });
    }
    if base_samples.len() < 2 {
        return Err(GermError::TooFewPoints { need: 2, got: base_samples.len() });
    }
    if !(c >= 1.0 && c.is_finite()) {
        return Err(GermError::Param(format!("base constant must be >= 1, got {c}")));
    }
    validate(h, base_samples, c)?;
    let n = h.dim_in;
    let image_radius = base_samples.iter().map(|x| norm(&h.apply(x))).fold(0.0, f64::max);
    let base_radius = base_samples.iter().map(|x| norm(x)).fold(0.0, f64::max);
    let c_forward = (1.0 + image_radius + c * base_radius).max(c);
    let c_inverse = (1.0 + base_radius + c * image_radius).max(c);
    let bounds = ConeBounds { c, image_radius, base_radius, c_forward, c_inverse };
    let k2 = 2f64.sqrt() * c_forward;
    let k1 = 1.0 / (2f64.sqrt() * c_inverse);
    let map = LipschitzMap::new(
        format!("cone({})", h.name),
        n + 1,
        n + 1,
        lift(h.forward_fn(), n),
        h.inverse_fn().map(|g| lift(g, n)),
        Some((k1, k2)),
        ConstantSource::Analytic,
    );
    Ok((map, bounds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_lifts_to_identity() {
        let samples: Vec<Point> = (0..20).map(|i| vec![(i as f64).cos(), (i as f64).sin()]).collect();
        let (m, _) = cone_extension(&LipschitzMap::identity(2), &samples, 1.0).unwrap();
        let p = [0.3 * 0.6, 0.3 * 0.8, 0.3];
        assert_eq!(m.apply(&p), p.to_vec());
        assert_eq!(m.apply(&[0.0, 0.0, 0.0]), vec![0.0; 3]);
    }

    #[test]
    fn doubling_a_coordinate() {
        let h = LipschitzMap::linear("double", &[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let samples: Vec<Point> = (0..=10).map(|i| vec![1.0 + i as f64 / 10.0, 1.0]).collect();
        let (m, b) = cone_extension(&h, &samples, 2.0).unwrap();
        assert!(b.c_forward >= 2.0);
        let p = [0.5 * 1.5, 0.5, 0.5];
        assert_eq!(m.apply(&p), vec![0.5 * 3.0, 0.5, 0.5]);
        let back = m.apply_inverse(&m.apply(&p)).unwrap();
        assert!(dist(&back, &p) < 1e-15);
    }

    #[test]
    fn constant_violation_propagates() {
        let h = LipschitzMap::linear("triple", &[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let samples = vec![vec![1.0, 1.0], vec![2.0, 1.0]];
        assert!(matches!(cone_extension(&h, &samples, 2.0), Err(GermError::ConstantViolation { .. })));
    }
}
