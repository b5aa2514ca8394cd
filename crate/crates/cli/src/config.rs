//! Experiment configuration files.
//!
//! ```json
//! {"subcommand": "st-fit", "fixture": "cusp", "seed": 7,
//!  "params": {"per_shell": 128, "schedule": {"r0": 0.1, "ratio": 0.5, "shells": 14}}}
//! ```

use clap::ValueEnum;
use germlens::config::{GermSpec, MapSpec};
use germlens::fixtures::Hypotheses;
use germlens::geom::Point;
use germlens::{Gauge, Schedule};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Largest sample count accepted per shell, probe set or ε.
pub const MAX_COUNT: usize = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Direction set and its dimension.
    Dirset,
    /// Tangent cone generated by the direction set.
    Cone,
    /// Monomial gauge fit of A against B.
    StFit,
    /// Horn-neighbourhood equivalence search for A and B.
    StEquiv,
    /// Transported gauges under a bi-Lipschitz map.
    Sandwich,
    /// Strong and weak sequence selection probes.
    Ssp,
    /// Direction sets of h(A) and h(LD(A)).
    LdImage,
    /// Horn-neighbourhood volumes over an ε schedule.
    Vol,
    /// Volume ratio of A against B.
    VolRatio,
    /// Volume ratio of widths c·θ against θ.
    Ctimes,
    /// Intersection dimension before and after a map.
    Invariant,
    /// Extremal Lipschitz extensions on a probe set.
    Extend,
    /// Exact series arithmetic and cell volumes.
    Puiseux,
    /// The fixture catalog.
    Fixtures,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugeSpec {
    /// `c * t^alpha`.
    Monomial { c: f64, alpha: f64 },
}

impl GaugeSpec {
    pub fn build(&self) -> Result<Gauge> {
        match *self {
            GaugeSpec::Monomial { c, alpha } => Ok(Gauge::monomial_on(c, alpha, f64::INFINITY)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    DecaysToZero,
    Comparable,
    Increases,
}

/// Estimator parameters; anything left out takes the estimator's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role_b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_shell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_shells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finest: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes_per_cell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub importance: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<Hypotheses>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchors: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literals: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<GermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<GermSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: u64,
}

fn count(name: &str, v: Option<usize>) -> Result<()> {
    match v {
        Some(n) if n == 0 || n > MAX_COUNT => Err(CliError::Invalid(format!("params.{name} must be in 1..={MAX_COUNT}, got {n}"))),
        _ => Ok(()),
    }
}

fn positive(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(CliError::Invalid(format!("params.{name} must be positive, got {x}"))),
        _ => Ok(()),
    }
}

fn unit_grid(name: &str, v: &Option<Vec<f64>>) -> Result<()> {
    if let Some(g) = v {
        if g.is_empty() || g.iter().any(|e| !(e.is_finite() && *e > 0.0 && *e <= 1.0)) {
            return Err(CliError::Invalid(format!("params.{name} needs values in (0, 1]")));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    /// Parses and validates; schema errors name the offending path.
    pub fn from_json(src: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(src);
        let cfg: ExperimentConfig =
            serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema { path: e.path().to_string(), message: e.inner().to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if let Some(s) = p.schedule {
            Schedule::new(s.r0, s.ratio, s.shells)?;
        }
        for (name, v) in [
            ("per_shell", p.per_shell),
            ("active_shells", p.active_shells),
            ("finest", p.finest),
            ("budget", p.budget),
            ("tail", p.tail),
            ("probes_per_cell", p.probes_per_cell),
            ("max_directions", p.max_directions),
            ("samples", p.samples),
            ("probes", p.probes),
        ] {
            count(name, v)?;
        }
        for (name, v) in [("eta", p.eta), ("factor", p.factor), ("lipschitz", p.lipschitz)] {
            positive(name, v)?;
        }
        if p.eta.is_some_and(|e| e >= 2.0) {
            return Err(CliError::Invalid("params.eta must be below 2".into()));
        }
        unit_grid("eps_grid", &p.eps_grid)?;
        unit_grid("eps", &p.eps)?;
        if let Some((k1, k2)) = p.constants {
            if !(k1 > 0.0 && k1 <= k2 && k2.is_finite()) {
                return Err(CliError::Invalid(format!("params.constants need 0 < k1 <= k2, got ({k1}, {k2})")));
            }
        }
        if let Some(g) = &p.gauge {
            g.build()?;
        }
        if self.fixture.is_some() && self.a.is_some() {
            return Err(CliError::Invalid("give either a fixture or an inline germ a, not both".into()));
        }
        Ok(())
    }
}
