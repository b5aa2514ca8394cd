//! Extension by zero of a map defined on a full subcomplex, skeleton by
//! skeleton: on a simplex with a vertex `v0` outside the subcomplex the
//! value is `s * h(q)` where `q` is the point of the opposite face and `s`
//! the weight on that face.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GermError, Result};
use crate::geom::Point;

const BARY_TOL: f64 = 1e-12;

pub type BaseMap = Arc<dyn Fn(&[f64]) -> Point + Send + Sync>;

/// A finite simplicial complex in `R^n`, `n <= 3`, closed under faces.
#[derive(Debug, Clone)]
pub struct Complex {
    pub vertices: Vec<Point>,
    pub simplices: BTreeSet<Vec<usize>>,
}

fn faces(s: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << s.len()) {
        out.push((0..s.len()).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect());
    }
    out
}

impl Complex {
    pub fn new(vertices: Vec<Point>, top: &[Vec<usize>]) -> Result<Self> {
        let n = vertices.first().map_or(0, |v| v.len());
        if n == 0 || n > 3 {
            return Err(GermError::Param(format!("complexes are supported in dimensions 1 to 3, got {n}")));
        }
        let mut simplices = BTreeSet::new();
        for s in top {
            if s.len() > n + 1 || s.iter().any(|&i| i >= vertices.len()) {
                return Err(GermError::Param(format!("bad simplex {s:?}")));
            }
            let mut s = s.clone();
            s.sort_unstable();
            simplices.extend(faces(&s));
        }
        Ok(Complex { vertices, simplices })
    }

    /// A subcomplex is full when every simplex whose vertices all lie in it
    /// belongs to it.
    pub fn is_full(&self, sub: &BTreeSet<Vec<usize>>) -> bool {
        let verts: BTreeSet<usize> = sub.iter().flatten().copied().collect();
        self.simplices.iter().all(|s| !s.iter().all(|v| verts.contains(v)) || sub.contains(s))
    }

    /// Barycentric coordinates of `p` in `s`, if `p` lies in it.
    fn barycentric(&self, s: &[usize], p: &[f64]) -> Option<Vec<f64>> {
        let n = p.len();
        let k = s.len();
        let a = DMatrix::from_fn(n + 1, k, |r, c| if r < n { self.vertices[s[c]][r] } else { 1.0 });
        let mut rhs: Vec<f64> = p.to_vec();
        rhs.push(1.0);
        let b = DVector::from_vec(rhs);
        let t = a.clone().svd(true, true).solve(&b, 1e-14).ok()?;
        if (&a * &t - &b).norm() > 1e-9 || t.iter().any(|&v| v < -BARY_TOL) {
            return None;
        }
        Some(t.iter().map(|v| v.max(0.0)).collect())
    }
}

pub struct SimplicialExtension {
    complex: Complex,
    sub_vertices: BTreeSet<usize>,
    map: BaseMap,
    dim_out: usize,
}

impl SimplicialExtension {
    /// `map` is evaluated only on points of the subcomplex.
    pub fn new(complex: Complex, sub: &[Vec<usize>], map: BaseMap, dim_out: usize) -> Result<Self> {
        let mut closed = BTreeSet::new();
        for s in sub {
            let mut s = s.clone();
            s.sort_unstable();
            if !complex.simplices.contains(&s) {
                return Err(GermError::Param(format!("{s:?} is not a simplex of the complex")));
            }
            closed.extend(faces(&s));
        }
        if !complex.is_full(&closed) {
            return Err(GermError::Param("subcomplex is not full; subdivide first".into()));
        }
        let sub_vertices = closed.iter().flatten().copied().collect();
        Ok(SimplicialExtension { complex, sub_vertices, map, dim_out })
    }

    fn eval_on(&self, s: &[usize], t: &[f64]) -> Point {
        let support: Vec<(usize, f64)> =
            s.iter().zip(t).filter(|(_, &w)| w > BARY_TOL).map(|(&v, &w)| (v, w)).collect();
        let total: f64 = support.iter().map(|p| p.1).sum();
        let point = |pairs: &[(usize, f64)], z: f64| -> Point {
            let n = self.complex.vertices[0].len();
            (0..n).map(|d| pairs.iter().map(|&(v, w)| w * self.complex.vertices[v][d]).sum::<f64>() / z).collect()
        };
        if support.iter().all(|(v, _)| self.sub_vertices.contains(v)) {
            return (self.map)(&point(&support, total));
        }
        let pos = support.iter().position(|(v, _)| !self.sub_vertices.contains(v)).expect("some vertex outside");
        let rest: Vec<(usize, f64)> = support.iter().enumerate().filter(|&(i, _)| i != pos).map(|(_, &p)| p).collect();
        let weight: f64 = rest.iter().map(|p| p.1).sum::<f64>() / total;
        if rest.is_empty() {
            return vec![0.0; self.dim_out];
        }
        let verts: Vec<usize> = rest.iter().map(|p| p.0).collect();
        let ws: Vec<f64> = rest.iter().map(|p| p.1).collect();
        self.eval_on(&verts, &ws).into_iter().map(|v| weight * v).collect()
    }

    /// Value at `p`, or `None` outside the polyhedron.
    pub fn eval(&self, p: &[f64]) -> Option<Point> {
        let top_dim = self.complex.simplices.iter().map(|s| s.len()).max()?;
        for len in (1..=top_dim).rev() {
            for s in self.complex.simplices.iter().filter(|s| s.len() == len) {
                if let Some(t) = self.complex.barycentric(s, p) {
                    return Some(self.eval_on(s, &t));
                }
            }
        }
        None
    }
}

/// A triangulated square `[-2, 2]^2` whose central segment `[-1, 1] x {0}`
/// is a full subcomplex.
pub fn demo_complex() -> (Complex, Vec<Vec<usize>>) {
    let mut vertices = Vec::new();
    for j in 0..5 {
        for i in 0..5 {
            vertices.push(vec![i as f64 - 2.0, j as f64 - 2.0]);
        }
    }
    let id = |i: usize, j: usize| j * 5 + i;
    let mut top = Vec::new();
    for j in 0..4 {
        for i in 0..4 {
            top.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            top.push(vec![id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
        }
    }
    let sub = vec![vec![id(1, 2), id(2, 2)], vec![id(2, 2), id(3, 2)]];
    (Complex::new(vertices, &top).expect("valid demo complex"), sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::dist;

    fn demo() -> SimplicialExtension {
        let (k, sub) = demo_complex();
        let h: BaseMap = Arc::new(|p: &[f64]| vec![p[0] + 0.25 * p[0].sin(), 0.5]);
        SimplicialExtension::new(k, &sub, h, 2).unwrap()
    }

    #[test]
    fn agrees_on_the_subcomplex_and_vanishes_off_it() {
        let e = demo();
        for x in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            let v = e.eval(&[x, 0.0]).unwrap();
            assert!((v[0] - (x + 0.25 * f64::sin(x))).abs() < 1e-12 && (v[1] - 0.5).abs() < 1e-12);
        }
        assert_eq!(e.eval(&[2.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(e.eval(&[-1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert!(e.eval(&[3.0, 0.0]).is_none());
    }

    #[test]
    fn is_lipschitz_on_a_grid() {
        let e = demo();
        let pts: Vec<Point> = (0..=40).flat_map(|j| (0..=40).map(move |i| vec![-2.0 + 0.1 * i as f64, -2.0 + 0.1 * j as f64])).collect();
        let vals: Vec<Point> = pts.iter().map(|p| e.eval(p).unwrap()).collect();
        let mut worst = 0.0f64;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len().min(i + 90) {
                worst = worst.max(dist(&vals[i], &vals[j]) / dist(&pts[i], &pts[j]));
            }
        }
        assert!(worst < 5.0, "{worst}");
    }

    #[test]
    fn non_full_subcomplexes_are_rejected() {
        let k = Complex::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], &[vec![0, 1, 2]]).unwrap();
        let h: BaseMap = Arc::new(|p: &[f64]| p.to_vec());
        // the three edges without the triangle
        let sub = vec![vec![0, 1], vec![1, 2], vec![0, 2]];
        assert!(SimplicialExtension::new(k, &sub, h, 2).is_err());
    }
}
