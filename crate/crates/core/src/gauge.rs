//! Gauges: odd, strictly increasing, continuous germs `theta` with
//! `theta(0) = 0`, used as relative widths of horn neighbourhoods.

use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Gauge {
    /// `c * t^alpha`
    Monomial { c: f64, alpha: f64, t_max: f64 },
    /// Piecewise-linear through `(0, 0)` and the table nodes.
    Tabulated { ts: Vec<f64>, values: Vec<f64> },
    /// `outer * base(t / inner)`
    Scaled { outer: f64, inner: f64, base: Box<Gauge> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "order", rename_all = "snake_case")]
pub enum GaugeOrder {
    Equal,
    Le,
    Ge,
    Incomparable { witness_le: f64, witness_ge: f64 },
}

impl Gauge {
    pub const DEFAULT_T_MAX: f64 = 1.0;

    pub fn monomial(c: f64, alpha: f64) -> Result<Gauge> {
        Self::monomial_on(c, alpha, Self::DEFAULT_T_MAX)
    }

    pub fn monomial_on(c: f64, alpha: f64, t_max: f64) -> Result<Gauge> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(c) && ok(alpha) && (ok(t_max) || t_max == f64::INFINITY)) {
            return Err(GermError::InvalidGauge(format!(
                "monomial needs c > 0, alpha > 0, t_max > 0 (got {c}, {alpha}, {t_max})"
            )));
        }
        Ok(Gauge::Monomial { c, alpha, t_max })
    }

    /// The identity gauge `theta(t) = t`.
    pub fn linear() -> Gauge {
        Gauge::Monomial { c: 1.0, alpha: 1.0, t_max: Self::DEFAULT_T_MAX }
    }

    pub fn tabulated(ts: Vec<f64>, values: Vec<f64>) -> Result<Gauge> {
        if ts.is_empty() || ts.len() != values.len() {
            return Err(GermError::InvalidGauge("table needs matching, nonempty columns".into()));
        }
        let mut prev = (0.0, 0.0);
        for (&t, &v) in ts.iter().zip(&values) {
            if !(t.is_finite() && v.is_finite() && t > prev.0 && v > prev.1) {
                return Err(GermError::InvalidGauge("table must be strictly increasing from (0, 0)".into()));
            }
            prev = (t, v);
        }
        Ok(Gauge::Tabulated { ts, values })
    }

    pub fn scaled(outer: f64, inner: f64, base: Gauge) -> Result<Gauge> {
        if !(outer.is_finite() && inner.is_finite() && outer > 0.0 && inner > 0.0) {
            return Err(GermError::InvalidGauge("scale factors must be positive".into()));
        }
        Ok(match base {
            Gauge::Monomial { c, alpha, t_max } => Gauge::Monomial {
                c: outer * c * inner.powf(-alpha),
                alpha,
                t_max: t_max * inner,
            },
            other => Gauge::Scaled { outer, inner, base: Box::new(other) },
        })
    }

    /// `c * self`, a gauge of the same shape.
    pub fn times(&self, c: f64) -> Result<Gauge> {
        Self::scaled(c, 1.0, self.clone())
    }

    pub fn t_max(&self) -> f64 {
        match self {
            Gauge::Monomial { t_max, .. } => *t_max,
            Gauge::Tabulated { ts, .. } => *ts.last().expect("validated nonempty"),
            Gauge::Scaled { inner, base, .. } => inner * base.t_max(),
        }
    }

    /// Evaluates with the odd extension; errors outside `[-t_max, t_max]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let t_max = self.t_max();
        if !(t.abs() <= t_max) {
            return Err(GermError::GaugeDomain { t: t.abs(), t_max });
        }
        Ok(t.signum() * self.eval_pos(t.abs()))
    }

    /// Evaluation without the domain check (monomials extend naturally,
    /// tables extend by their last slope).
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        let v = self.eval_pos(t.abs());
        if t < 0.0 {
            -v
        } else {
            v
        }
    }

    fn eval_pos(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        match self {
            Gauge::Monomial { c, alpha, .. } => c * t.powf(*alpha),
            Gauge::Tabulated { ts, values } => {
                let i = ts.partition_point(|&x| x < t);
                let (t0, v0) = if i == 0 { (0.0, 0.0) } else { (ts[i - 1], values[i - 1]) };
                let (t1, v1) = if i < ts.len() {
                    (ts[i], values[i])
                } else if ts.len() >= 2 {
                    (ts[ts.len() - 1], values[values.len() - 1])
                } else {
                    return values[0] * t / ts[0];
                };
                if i >= ts.len() {
                    let (ta, va) = (ts[ts.len() - 2], values[values.len() - 2]);
                    return v1 + (t - t1) * (v1 - va) / (t1 - ta);
                }
                v0 + (t - t0) * (v1 - v0) / (t1 - t0)
            }
            Gauge::Scaled { outer, inner, base } => outer * base.eval_pos(t / inner),
        }
    }

    /// Checks strict monotonicity on a uniform grid of `n` points.
    pub fn is_increasing_on_grid(&self, n: usize) -> bool {
        let h = self.t_max().min(1e6) / n as f64;
        (0..n).all(|i| self.eval_pos(h * i as f64) < self.eval_pos(h * (i + 1) as f64))
    }
}

/// Compares two gauges on a geometric grid over `(0, t_max]`.
pub fn gauge_compare(a: &Gauge, b: &Gauge, t_max: f64, n: usize) -> GaugeOrder {
    let (mut le, mut ge) = (None, None);
    let mut all_equal = true;
    for i in 0..n {
        let t = t_max * (1e-6f64).powf(i as f64 / (n.max(2) - 1) as f64);
        let (x, y) = (a.eval_unchecked(t), b.eval_unchecked(t));
        let tol = 1e-12 * x.abs().max(y.abs());
        if (x - y).abs() > tol {
            all_equal = false;
            if x < y {
                le.get_or_insert(t);
            } else {
                ge.get_or_insert(t);
            }
        }
    }
    match (le, ge) {
        _ if all_equal => GaugeOrder::Equal,
        (Some(_), None) => GaugeOrder::Le,
        (None, Some(_)) => GaugeOrder::Ge,
        (Some(l), Some(g)) => GaugeOrder::Incomparable { witness_le: l, witness_ge: g },
        (None, None) => GaugeOrder::Equal,
    }
}
