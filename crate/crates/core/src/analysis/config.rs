use serde::{Deserialize, Serialize};

use crate::clustering::{HalfOpenBox, RegionQuery, SubsetFamily};
use crate::error::{Error, Result};
use crate::fields::FieldModel;
use crate::geometry::{DependenceSpec, PConvexSet, ScalingVector};
use crate::Scalar;

pub const CONFIG_VERSION: u32 = 1;

/// A region query with a name used in output keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNamedQuery", into = "RawNamedQuery")]
pub struct NamedQuery {
    pub name: String,
    pub query: RegionQuery,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNamedQuery {
    name: String,
    boxes: Vec<HalfOpenBox>,
}

impl TryFrom<RawNamedQuery> for NamedQuery {
    type Error = Error;

    fn try_from(raw: RawNamedQuery) -> Result<Self> {
        Ok(Self {
            name: raw.name,
            query: RegionQuery::new(raw.boxes)?,
        })
    }
}

impl From<NamedQuery> for RawNamedQuery {
    fn from(q: NamedQuery) -> Self {
        Self {
            name: q.name,
            boxes: q.query.boxes().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    /// Neighbourhood radii `m` for the runs estimator.
    #[serde(default = "default_runs")]
    pub runs_m: Vec<u32>,
    /// Radii `m` for the anti-clustering diagnostic.
    #[serde(default)]
    pub anti_clustering_m: Vec<u32>,
    /// Ranks `k` of the order statistics `ξ_(k)` to track.
    #[serde(default = "default_order_statistics")]
    pub order_statistics: Vec<usize>,
    /// Totals `ℓ` for conditional mean cluster sizes.
    #[serde(default = "default_given")]
    pub cluster_size_given: Vec<usize>,
}

fn default_runs() -> Vec<u32> {
    vec![2]
}

fn default_order_statistics() -> Vec<usize> {
    vec![1, 2]
}

fn default_given() -> Vec<usize> {
    vec![1, 2]
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            runs_m: default_runs(),
            anti_clustering_m: Vec::new(),
            order_statistics: default_order_statistics(),
            cluster_size_given: default_given(),
        }
    }
}

/// An acceptance bound on a summary statistic: either
/// `|value - target| ≤ tolerance` or `min ≤ value ≤ max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub statistic: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

impl Check {
    pub fn within(statistic: &str, target: f64, tolerance: f64) -> Self {
        Self {
            statistic: statistic.into(),
            target: Some(target),
            tolerance: Some(tolerance),
            min: None,
            max: None,
        }
    }

    pub fn between(statistic: &str, min: Option<f64>, max: Option<f64>) -> Self {
        Self {
            statistic: statistic.into(),
            target: None,
            tolerance: None,
            min,
            max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let targeted = self.target.is_some() || self.tolerance.is_some();
        let ranged = self.min.is_some() || self.max.is_some();
        match (targeted, ranged) {
            (true, false) if self.target.is_some() && self.tolerance.is_some_and(|t| t >= 0.0) => Ok(()),
            (false, true) => Ok(()),
            _ => Err(Error::Config(format!(
                "check `{}` needs either target and a non-negative tolerance, or min/max",
                self.statistic
            ))),
        }
    }
}

/// Everything needed to reproduce one Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct ExperimentConfig<T> {
    pub version: u32,
    pub model: FieldModel<T>,
    pub generator: PConvexSet<T>,
    pub scale: ScalingVector<T>,
    pub tau: f64,
    /// Block count; the default rule is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    /// Defaults to the model's own `(m, γ, α)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dependence: Option<DependenceSpec>,
    pub replications: u64,
    pub seed: u64,
    #[serde(default)]
    pub queries: Vec<NamedQuery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<SubsetFamily<T>>,
    #[serde(default)]
    pub estimators: EstimatorConfig,
    #[serde(default)]
    pub checks: Vec<Check>,
}

impl<T: Scalar> ExperimentConfig<T> {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn dependence(&self) -> DependenceSpec {
        self.dependence.clone().unwrap_or_else(|| self.model.dependence(self.dim()))
    }

    /// Structural checks that do not need the lattice region.
    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {}, expected {CONFIG_VERSION}",
                self.version
            )));
        }
        let d = self.dim();
        self.generator.validate()?;
        self.model.validate(d)?;
        if self.scale.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.scale.dim(),
            });
        }
        self.dependence().validate(d)?;
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if !(self.tau > 0.0) {
            return Err(Error::Config("tau must be positive".into()));
        }
        if self.k == Some(0) {
            return Err(Error::Config("k must be positive".into()));
        }
        for q in &self.queries {
            if q.name.is_empty() || q.name == "C" || q.name.contains('.') {
                return Err(Error::Config(format!("invalid query name `{}`", q.name)));
            }
            if q.query.boxes().iter().any(|b| b.dim() != d) {
                return Err(Error::Config(format!("query `{}` has the wrong dimension", q.name)));
            }
        }
        if let Some(f) = &self.family {
            if f.members.iter().any(|m| m.generator.dim() != d) {
                return Err(Error::Config("family generator has the wrong dimension".into()));
            }
        }
        if self.estimators.order_statistics.contains(&0) {
            return Err(Error::Config("order statistic ranks start at 1".into()));
        }
        for c in &self.checks {
            c.validate()?;
        }
        Ok(())
    }
}
