use rand::Rng;
use serde::Serialize;

use super::LipschitzMap;
use crate::error::{GermError, Result};
use crate::geom::{add, dist, random_in_ball, random_unit, rng_for, scale, Point};

/// Number of decades in the scale ladder; the finest pair gap is
/// `region * 10^-(LEVELS-1)`.
pub const LEVELS: usize = 8;
/// Ratio change across the ladder that counts as non-Lipschitz evidence.
pub const UNBOUNDED_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleRow {
    pub scale: f64,
    pub min_quotient: f64,
    pub max_quotient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsEstimate {
    pub k1: f64,
    pub k2: f64,
    /// The lower quotient keeps shrinking with the scale: no inverse bound.
    pub inverse_unbounded: bool,
    /// The upper quotient keeps growing with the scale.
    pub forward_unbounded: bool,
    pub pairs: usize,
    pub ladder: Vec<ScaleRow>,
    /// Pair attaining the smallest quotient.
    pub worst_pair: (Point, Point),
}

fn trend(values: &[f64], shrinking: bool) -> bool {
    let monotone = values.windows(2).all(|w| if shrinking { w[1] <= w[0] } else { w[1] >= w[0] });
    let (first, last) = (values[0], values[values.len() - 1]);
    let change = if shrinking { first / last } else { last / first };
    monotone && change > UNBOUNDED_FACTOR
}

/// Sampled difference quotients of `h` on the ball of radius `region`,
/// over pair gaps from `region` down to `region * 1e-7`: near-diagonal
/// pairs, pairs inside the ball of the current scale and pairs anchored at
/// the origin along random and coordinate directions.
pub fn constants_estimate(h: &LipschitzMap, region: f64, pair_count: usize, seed: u64) -> Result<ConstantsEstimate> {
    if !(region > 0.0 && region.is_finite()) {
        return Err(GermError::Param(format!("region radius must be positive, got {region}")));
    }
    let n = h.dim_in;
    let per = (pair_count / LEVELS).max(3 * n + 3);
    let mut est = ConstantsEstimate {
        k1: f64::INFINITY,
        k2: 0.0,
        inverse_unbounded: false,
        forward_unbounded: false,
        pairs: 0,
        ladder: Vec::with_capacity(LEVELS),
        worst_pair: (vec![0.0; n], vec![0.0; n]),
    };
    let origin = vec![0.0; n];
    for j in 0..LEVELS {
        let s = region * 10f64.powi(-(j as i32));
        let mut rng = rng_for(seed, j as u64);
        let mut row = ScaleRow { scale: s, min_quotient: f64::INFINITY, max_quotient: 0.0 };
        for i in 0..per {
            let (x, y) = match i % 3 {
                0 => {
                    let x = random_in_ball(n, region - s.min(region / 2.0), &mut rng);
                    let u = random_unit(n, &mut rng);
                    let y = add(&x, &scale(&u, s * rng.random::<f64>().max(1e-3)));
                    (x, y)
                }
                1 => (random_in_ball(n, s, &mut rng), random_in_ball(n, s, &mut rng)),
                _ => {
                    let dir = if i / 3 < n {
                        let mut e = vec![0.0; n];
                        e[i / 3] = 1.0;
                        e
                    } else {
                        random_unit(n, &mut rng)
                    };
                    (scale(&dir, s), origin.clone())
                }
            };
            let d = dist(&x, &y);
            if d == 0.0 {
                continue;
            }
            let q = dist(&h.apply(&x), &h.apply(&y)) / d;
            if q < row.min_quotient {
                row.min_quotient = q;
                if q < est.k1 {
                    est.worst_pair = (x.clone(), y.clone());
                }
            }
            row.max_quotient = row.max_quotient.max(q);
            est.pairs += 1;
        }
        est.k1 = est.k1.min(row.min_quotient);
        est.k2 = est.k2.max(row.max_quotient);
        est.ladder.push(row);
    }
    let mins: Vec<f64> = est.ladder.iter().map(|r| r.min_quotient).collect();
    let maxs: Vec<f64> = est.ladder.iter().map(|r| r.max_quotient).collect();
    est.inverse_unbounded = trend(&mins, true);
    est.forward_unbounded = trend(&maxs, false);
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_oscillation() {
        let e = constants_estimate(&LipschitzMap::identity(2), 0.5, 4000, 1).unwrap();
        assert!((e.k1 - 1.0).abs() < 1e-9 && (e.k2 - 1.0).abs() < 1e-9);
        let e = constants_estimate(&LipschitzMap::oscillation(), 0.5, 4000, 1).unwrap();
        assert!(e.k2 <= 1.0 + 2f64.sqrt() && e.k1 > 0.0);
        assert!(!e.inverse_unbounded && !e.forward_unbounded);
    }

    #[test]
    fn cube_is_flagged() {
        let e = constants_estimate(&LipschitzMap::cube_z(), 0.5, 4000, 1).unwrap();
        assert!(e.inverse_unbounded);
        assert!(e.k1 < 1e-10);
    }
}
