use serde::{Deserialize, Serialize};

use super::partition::{default_block_count, BlockPartition, DependenceSpec};
use super::region::LatticeRegion;
use super::report::assumption_report;
use super::set::{PConvexSet, ScalingVector};
use crate::error::{Error, Result};
use crate::lattice::{minkowski_sum_count, Point, PointSet};
use crate::Scalar;

pub const GEOMETRY_VERSION: u32 = 1;

/// One step `n` of a scale schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct ScheduleStep<T> {
    pub n: u64,
    pub scale: ScalingVector<T>,
    /// Block count `k_n`; the default rule applies when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
}

/// A generator observed along a schedule of scaling vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct GeometrySpec<T> {
    pub version: u32,
    pub generator: PConvexSet<T>,
    pub schedule: Vec<ScheduleStep<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dependence: Option<DependenceSpec>,
    /// Summand `B` for the ratio `|D_n ⊕ B| / |D_n|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summand: Option<Vec<Point>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryRow {
    pub n: u64,
    pub region_size: usize,
    pub set_volume: f64,
    pub p: usize,
    pub q: usize,
    pub q_minus: usize,
    pub k: u64,
    pub t: Vec<i64>,
    pub intrinsic_volume_sums: Option<Vec<f64>>,
    pub bound: f64,
    pub minkowski_ratio: Option<f64>,
}

impl<T: Scalar> GeometrySpec<T> {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != GEOMETRY_VERSION {
            return Err(Error::Config(format!(
                "unsupported geometry version {}, expected {GEOMETRY_VERSION}",
                self.version
            )));
        }
        let d = self.generator.dim();
        self.generator.validate()?;
        if self.schedule.is_empty() {
            return Err(Error::Config("empty schedule".into()));
        }
        for step in &self.schedule {
            if step.scale.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: step.scale.dim(),
                });
            }
            if step.k == Some(0) {
                return Err(Error::Config("k must be positive".into()));
            }
        }
        if let Some(dep) = &self.dependence {
            dep.validate(d)?;
        }
        if let Some(b) = &self.summand {
            PointSet::from_points(d, b.iter().cloned())?;
        }
        Ok(())
    }

    /// Enumerates `D_n`, the block partition and the diagnostics at every step.
    pub fn table(&self) -> Result<Vec<GeometryRow>> {
        self.validate()?;
        let d = self.generator.dim();
        let dep = self
            .dependence
            .clone()
            .unwrap_or_else(|| DependenceSpec::m_dependent(0, d));
        let scales: Vec<ScalingVector<T>> = self.schedule.iter().map(|s| s.scale.clone()).collect();
        let report = assumption_report(&self.generator, &scales, None)?;
        let summand = self
            .summand
            .as_ref()
            .map(|b| PointSet::from_points(d, b.iter().cloned()))
            .transpose()?;
        self.schedule
            .iter()
            .zip(report.rows)
            .map(|(step, diag)| {
                let region = LatticeRegion::new(self.generator.clone(), step.scale.clone())?;
                let k = step.k.unwrap_or_else(|| default_block_count(&step.scale, &dep));
                let partition = BlockPartition::build(&region, k)?;
                let minkowski_ratio = match &summand {
                    Some(b) if !region.is_empty() => {
                        Some(minkowski_sum_count(region.points(), b)? as f64 / region.len() as f64)
                    }
                    _ => None,
                };
                Ok(GeometryRow {
                    n: step.n,
                    region_size: region.len(),
                    set_volume: diag.set_volume,
                    p: partition.p(),
                    q: partition.q(),
                    q_minus: partition.q_minus(),
                    k,
                    t: partition.t.clone(),
                    intrinsic_volume_sums: diag.intrinsic_volume_sums,
                    bound: diag.bound,
                    minkowski_ratio,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_row() {
        let spec = GeometrySpec::<f64>::from_json(
            r#"{"version":1,
                "generator":{"bodies":[{"kind":"box","lower":[0,0],"upper":[1,1]}]},
                "schedule":[{"n":100,"scale":[100,100],"k":25}],
                "summand":[[0,0],[1,0],[-1,0],[0,1],[0,-1]]}"#,
        )
        .unwrap();
        let rows = spec.table().unwrap();
        let r = &rows[0];
        assert_eq!((r.p, r.q, r.k, r.t.as_slice()), (25, 36, 25, &[20, 20][..]));
        assert_eq!(r.region_size, 101 * 101);
        let expected = (101.0 * 101.0 + 4.0 * 101.0) / (101.0 * 101.0);
        assert!((r.minkowski_ratio.unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = GeometrySpec::<f64>::from_json(
            r#"{"version":1,"generator":{"bodies":[{"kind":"box","lower":[0],"upper":[1]}]},"schedule":[],"bogus":1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }
}
