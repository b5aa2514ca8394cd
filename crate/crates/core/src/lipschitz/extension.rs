use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};
use crate::geom::{dist, Point};
use crate::germ::{GermSet, Schedule};

/// Slack allowed when validating the Lipschitz condition on anchors.
const VALIDATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "t", rename_all = "snake_case")]
pub enum ExtensionMode {
    /// `inf_a f(a) + L d(x, a)`, the largest extension.
    Inf,
    /// `sup_a f(a) - L d(x, a)`, the smallest extension.
    Sup,
    /// `t * inf + (1 - t) * sup`.
    Convex(f64),
}

/// Extensions of an `L`-Lipschitz function known on finitely many anchors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BanachExtension {
    anchors: Vec<Point>,
    values: Vec<f64>,
    lipschitz: f64,
}

impl BanachExtension {
    pub fn new(anchors: Vec<Point>, values: Vec<f64>, lipschitz: f64) -> Result<Self> {
        if anchors.is_empty() || anchors.len() != values.len() {
            return Err(GermError::Param("anchors and values must be nonempty and of equal length".into()));
        }
        if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(GermError::Param(format!("Lipschitz constant must be finite and >= 0, got {lipschitz}")));
        }
        let n = anchors[0].len();
        if let Some(bad) = anchors.iter().find(|a| a.len() != n) {
            return Err(GermError::Dimension { expected: n, got: bad.len() });
        }
        for i in 0..anchors.len() {
            for j in (i + 1)..anchors.len() {
                let d = dist(&anchors[i], &anchors[j]);
                let df = (values[i] - values[j]).abs();
                if df > lipschitz * d * (1.0 + VALIDATION_TOL) + f64::MIN_POSITIVE {
                    return Err(GermError::ConstantViolation {
                        x: anchors[i].clone(),
                        y: anchors[j].clone(),
                        quotient: if d > 0.0 { df / d } else { f64::INFINITY },
                        bound: lipschitz,
                    });
                }
            }
        }
        Ok(BanachExtension { anchors, values, lipschitz })
    }

    /// Anchors sampled from the shells of a germ, with values `f`.
    pub fn from_germ<F: Fn(&[f64]) -> f64>(
        a: &GermSet,
        f: F,
        lipschitz: f64,
        schedule: &Schedule,
        per_shell: usize,
        seed: u64,
    ) -> Result<Self> {
        let anchors: Vec<Point> =
            schedule.radii().into_iter().flat_map(|r| a.sample_shell(r, per_shell, seed)).collect();
        if anchors.is_empty() {
            return Err(GermError::EmptyGerm(a.name.clone()));
        }
        let values = anchors.iter().map(|x| f(x)).collect();
        Self::new(anchors, values, lipschitz)
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn anchors(&self) -> &[Point] {
        &self.anchors
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn alpha(&self, x: &[f64]) -> f64 {
        self.anchors
            .iter()
            .zip(&self.values)
            .map(|(a, v)| v + self.lipschitz * dist(x, a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn beta(&self, x: &[f64]) -> f64 {
        self.anchors
            .iter()
            .zip(&self.values)
            .map(|(a, v)| v - self.lipschitz * dist(x, a))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn eval(&self, x: &[f64], mode: ExtensionMode) -> f64 {
        match mode {
            ExtensionMode::Inf => self.alpha(x),
            ExtensionMode::Sup => self.beta(x),
            ExtensionMode::Convex(t) => t * self.alpha(x) + (1.0 - t) * self.beta(x),
        }
    }
}

pub fn banach_extension(anchors: Vec<Point>, values: Vec<f64>, lipschitz: f64) -> Result<BanachExtension> {
    BanachExtension::new(anchors, values, lipschitz)
}
