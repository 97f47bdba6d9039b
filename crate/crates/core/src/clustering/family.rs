use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LatticeRegion, PConvexSet};
use crate::lattice::PointSet;
use crate::Scalar;

/// One generator `C_g` of a subset family with its target fraction `b_g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct SubsetSpec<T> {
    pub generator: PConvexSet<T>,
    pub fraction: f64,
}

/// Generators of the sets `B_n^g = (c_n C_g ∩ Z^d) ∩ D_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct SubsetFamily<T> {
    pub members: Vec<SubsetSpec<T>>,
}

/// A subset family realised at one scale.
#[derive(Debug, Clone)]
pub struct RealizedFamily {
    pub sets: Vec<PointSet>,
    pub fractions: Vec<f64>,
}

impl<T: Scalar> SubsetFamily<T> {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Realises every member at the scale of `region`; members must be
    /// pairwise disjoint as lattice sets.
    pub fn realize(&self, region: &LatticeRegion<T>) -> Result<RealizedFamily> {
        let mut sets = Vec::with_capacity(self.len());
        for spec in &self.members {
            if !(spec.fraction >= 0.0) {
                return Err(Error::InvalidArgument("family fractions must be non-negative".into()));
            }
            let r = LatticeRegion::new(spec.generator.clone(), region.scale().clone())?;
            let coords: Vec<i64> = r
                .points()
                .iter()
                .filter(|v| region.points().contains(v))
                .flatten()
                .copied()
                .collect();
            sets.push(PointSet::from_flat(region.dim(), coords));
        }
        for (i, a) in sets.iter().enumerate() {
            for (j, b) in sets.iter().enumerate().skip(i + 1) {
                let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
                if let Some(p) = small.iter().find(|v| large.contains(v)) {
                    return Err(Error::OverlappingFamily {
                        first: i,
                        second: j,
                        point: p.to_vec(),
                    });
                }
            }
        }
        Ok(RealizedFamily {
            sets,
            fractions: self.members.iter().map(|m| m.fraction).collect(),
        })
    }
}

impl RealizedFamily {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Index of the member containing `v`.
    pub fn member_of(&self, v: &[i64]) -> Option<usize> {
        self.sets.iter().position(|s| s.contains(v))
    }

    /// `|B_n^g| / |D_n|` per member.
    pub fn realized_fractions(&self, region_len: usize) -> Vec<f64> {
        self.sets.iter().map(|s| s.len() as f64 / region_len as f64).collect()
    }
}
