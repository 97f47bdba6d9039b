use serde::{Deserialize, Serialize};

use super::region::LatticeRegion;
use super::set::ScalingVector;
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, Point, PointSet};
use crate::Scalar;

/// Separation and mixing constants `(m, γ_n, α_n)` of a field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DependenceSpec {
    pub m: u32,
    pub gamma: Vec<i64>,
    pub alpha: f64,
}

impl DependenceSpec {
    /// An `m`-dependent field: `γ = (m, …, m)` and `α = 0`.
    pub fn m_dependent(m: u32, dim: usize) -> Self {
        Self {
            m,
            gamma: vec![m as i64; dim],
            alpha: 0.0,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.gamma.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.gamma.len(),
            });
        }
        if self.gamma.iter().any(|g| *g < 0) || !(self.alpha >= 0.0) {
            return Err(Error::InvalidArgument("gamma and alpha must be non-negative".into()));
        }
        if self.alpha == 0.0 && self.gamma.iter().any(|g| *g < self.m as i64) {
            return Err(Error::InvalidArgument("an m-dependent spec needs gamma ≥ m entry-wise".into()));
        }
        Ok(())
    }

    pub fn max_gamma(&self) -> i64 {
        self.gamma.iter().copied().max().unwrap_or(0)
    }
}

/// Largest integer `t` with `t ≤ c / k^{1/d}`, i.e. `t^d k ≤ c^d`.
pub fn block_side(c: f64, k: u64, dim: usize) -> i64 {
    let root = (k as f64).powf(1.0 / dim as f64);
    let mut t = (c / root).floor().max(0.0) as i64;
    let fits = |t: i64| (t as f64).powi(dim as i32) * k as f64 <= c.powi(dim as i32);
    while fits(t + 1) {
        t += 1;
    }
    while t > 0 && !fits(t) {
        t -= 1;
    }
    t
}

/// Default block count `⌊min_ℓ c_ℓ^{d/2}⌋`, reduced until every side is at
/// least `4 max γ`.
pub fn default_block_count<T: Scalar>(scale: &ScalingVector<T>, dep: &DependenceSpec) -> u64 {
    let d = scale.dim();
    let cmin = scale
        .entries()
        .iter()
        .map(|c| c.as_f64())
        .fold(f64::INFINITY, f64::min);
    let mut k = cmin.powf(d as f64 / 2.0).floor().max(1.0) as u64;
    let need = 4 * dep.max_gamma();
    if need > 0 {
        while k > 1
            && scale
                .entries()
                .iter()
                .any(|c| block_side(c.as_f64(), k, d) < need)
        {
            k -= 1;
        }
    }
    k
}

/// Block partition of `Z^d` into the half-open boxes
/// `I_z = t (z + [0,1)^d)` and the index families `P ⊆ Q⁻ ⊆ Q`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockPartition {
    pub k: u64,
    pub t: Vec<i64>,
    /// Blocks contained in `C_n`.
    pub inner: PointSet,
    /// Blocks whose corner `z t / c_n` lies in `C`.
    pub anchored: PointSet,
    /// Blocks meeting `C_n`.
    pub outer: PointSet,
}

impl BlockPartition {
    pub fn build<T: Scalar>(region: &LatticeRegion<T>, k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("block count k must be positive".into()));
        }
        let d = region.dim();
        let c = region.scale().entries();
        let t: Vec<i64> = c.iter().map(|c| block_side(c.as_f64(), k, d)).collect();
        if let Some(axis) = t.iter().position(|t| *t == 0) {
            return Err(Error::PartitionTooFine {
                axis: axis + 1,
                scale: c[axis].as_f64(),
                k,
            });
        }
        let generator = region.generator();
        let (lo, hi) = generator.extent();
        let zrange = LatticeBox::new(
            (0..d)
                .map(|l| (lo[l] * c[l]).floor().to_i64().unwrap().div_euclid(t[l]) - 1)
                .collect(),
            (0..d)
                .map(|l| (hi[l] * c[l]).ceil().to_i64().unwrap().div_euclid(t[l]) + 1)
                .collect(),
        );
        let (mut inner, mut anchored, mut outer) = (Vec::new(), Vec::new(), Vec::new());
        let mut blo = vec![T::zero(); d];
        let mut bhi = vec![T::zero(); d];
        for z in zrange.iter() {
            for l in 0..d {
                blo[l] = T::from_i64_exact(z[l] * t[l]) / c[l];
                bhi[l] = T::from_i64_exact((z[l] + 1) * t[l]) / c[l];
            }
            if generator.meets_half_open_box(&blo, &bhi) {
                outer.extend_from_slice(&z);
            }
            if generator.contains(&blo) {
                anchored.extend_from_slice(&z);
            }
            if generator.contains_closed_box(&blo, &bhi) {
                inner.extend_from_slice(&z);
            }
        }
        Ok(Self {
            k,
            t,
            inner: PointSet::from_sorted_unchecked(d, inner),
            anchored: PointSet::from_sorted_unchecked(d, anchored),
            outer: PointSet::from_sorted_unchecked(d, outer),
        })
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    /// `p_{n,k}`.
    pub fn p(&self) -> usize {
        self.inner.len()
    }

    /// `q_{n,k}`.
    pub fn q(&self) -> usize {
        self.outer.len()
    }

    /// `|Q⁻_{n,k}|`.
    pub fn q_minus(&self) -> usize {
        self.anchored.len()
    }

    /// Lattice points per block, `∏ t_ℓ`.
    pub fn block_len(&self) -> usize {
        self.t.iter().map(|t| *t as usize).product()
    }

    /// `J_z = I_z ∩ Z^d`.
    pub fn block(&self, z: &[i64]) -> LatticeBox {
        LatticeBox::new(
            z.iter().zip(&self.t).map(|(z, t)| z * t).collect(),
            z.iter().zip(&self.t).map(|(z, t)| (z + 1) * t - 1).collect(),
        )
    }

    /// Block index `z` with `v ∈ J_z`.
    pub fn block_of(&self, v: &[i64]) -> Point {
        v.iter().zip(&self.t).map(|(v, t)| v.div_euclid(*t)).collect()
    }

    /// The original-scale corner `t z`.
    pub fn corner(&self, z: &[i64]) -> Point {
        z.iter().zip(&self.t).map(|(z, t)| z * t).collect()
    }

    /// The cluster point `z t / c_n`.
    pub fn corner_rescaled<T: Scalar>(&self, z: &[i64], scale: &ScalingVector<T>) -> Vec<T> {
        scale.rescale(&self.corner(z))
    }

    fn union_of(&self, blocks: &PointSet) -> PointSet {
        let d = self.dim();
        let mut flat = Vec::with_capacity(blocks.len() * self.block_len() * d);
        for z in blocks.iter() {
            for v in self.block(z).iter() {
                flat.extend_from_slice(&v);
            }
        }
        PointSet::from_flat(d, flat)
    }

    /// `D⁻ = ∪_{z ∈ P} J_z`.
    pub fn d_minus(&self) -> PointSet {
        self.union_of(&self.inner)
    }

    /// `D⁺ = ∪_{z ∈ Q} J_z`.
    pub fn d_plus(&self) -> PointSet {
        self.union_of(&self.outer)
    }

    /// `D̃ = ∪_{z ∈ Q⁻} J_z`.
    pub fn d_tilde(&self) -> PointSet {
        self.union_of(&self.anchored)
    }

    /// Bounding box of `D̃`.
    pub fn d_tilde_hull(&self) -> LatticeBox {
        let zb = self.anchored.bounding_box();
        if zb.is_empty() {
            return zb;
        }
        self.block(&zb.lo).hull(&self.block(&zb.hi))
    }

    /// Block-sized distance threshold `√d / k^{1/d}` on the rescaled scale.
    pub fn distance_threshold(&self) -> f64 {
        let d = self.dim() as f64;
        d.sqrt() / (self.k as f64).powf(1.0 / d)
    }
}

/// The `γ`-separated core of `J_z`: `H_z` (upper faces pulled in by `γ`) or,
/// two-sided, `H̃_z` (both faces pulled in). May be empty.
pub fn separated_core(z: &[i64], partition: &BlockPartition, dep: &DependenceSpec, two_sided: bool) -> LatticeBox {
    let t = &partition.t;
    let g = &dep.gamma;
    LatticeBox::new(
        (0..z.len())
            .map(|l| z[l] * t[l] + if two_sided { g[l] } else { 0 })
            .collect(),
        (0..z.len()).map(|l| (z[l] + 1) * t[l] - 1 - g[l]).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConvexBody, PConvexSet};

    fn region(gen: ConvexBody<f64>, c: Vec<f64>) -> LatticeRegion<f64> {
        LatticeRegion::new(PConvexSet::single(gen).unwrap(), ScalingVector::new(c).unwrap()).unwrap()
    }

    #[test]
    fn block_side_examples() {
        assert_eq!(block_side(100.0, 25, 2), 20);
        assert_eq!(block_side(103.0, 16, 2), 25);
        assert_eq!(block_side(47.0, 16, 2), 11);
        assert_eq!(block_side(10.0, 1000, 2), 0);
        assert_eq!(block_side(150.0, 25, 2), 30);
        assert_eq!(block_side(1000.0, 1000, 3), 100);
    }

    #[test]
    fn unit_square_partition_counts() {
        let r = region(ConvexBody::unit_cube(2), vec![100.0, 100.0]);
        let part = BlockPartition::build(&r, 25).unwrap();
        assert_eq!(part.t, vec![20, 20]);
        assert_eq!((part.p(), part.q(), part.q_minus()), (25, 36, 36));
    }

    #[test]
    fn anisotropic_block_sides() {
        let r = region(ConvexBody::unit_cube(2), vec![103.0, 47.0]);
        let part = BlockPartition::build(&r, 16).unwrap();
        assert_eq!(part.t, vec![25, 11]);
    }

    #[test]
    fn too_fine_partition_names_axis() {
        let r = region(ConvexBody::unit_cube(2), vec![10.0, 10.0]);
        match BlockPartition::build(&r, 1000) {
            Err(Error::PartitionTooFine { axis, .. }) => assert_eq!(axis, 1),
            other => panic!("expected partition error, got {other:?}"),
        }
    }

    #[test]
    fn separated_core_examples() {
        let r = region(ConvexBody::unit_cube(2), vec![100.0, 100.0]);
        let part = BlockPartition::build(&r, 25).unwrap();
        let dep = DependenceSpec::m_dependent(2, 2);
        assert_eq!(separated_core(&[0, 0], &part, &dep, false), LatticeBox::new(vec![0, 0], vec![17, 17]));
        assert_eq!(separated_core(&[0, 0], &part, &dep, true), LatticeBox::new(vec![2, 2], vec![17, 17]));
        let wide = DependenceSpec::m_dependent(20, 2);
        assert!(separated_core(&[0, 0], &part, &wide, false).is_empty());
        let j = part.block(&[1, 2]);
        let h = separated_core(&[1, 2], &part, &dep, false);
        let ht = separated_core(&[1, 2], &part, &dep, true);
        assert!(j.contains_box(&h) && h.contains_box(&ht));
    }

    #[test]
    fn families_are_nested_and_sandwich_holds() {
        let disc = ConvexBody::Ball {
            center: vec![0.1, -0.05],
            radius: 0.5,
        };
        let r = region(disc, vec![60.0, 45.0]);
        let part = BlockPartition::build(&r, 16).unwrap();
        assert!(part.inner.is_subset_of(&part.anchored));
        assert!(part.anchored.is_subset_of(&part.outer));
        let dm = part.d_minus();
        let dp = part.d_plus();
        assert!(dm.is_subset_of(r.points()));
        assert!(r.points().is_subset_of(&dp));
        assert_eq!(dm.len(), part.p() * part.block_len());
        assert_eq!(dp.len(), part.q() * part.block_len());
    }

    #[test]
    fn default_block_count_respects_gamma() {
        let s = ScalingVector::new(vec![150.0, 150.0]).unwrap();
        assert_eq!(default_block_count(&s, &DependenceSpec::m_dependent(0, 2)), 150);
        let k = default_block_count(&s, &DependenceSpec::m_dependent(5, 2));
        assert!(block_side(150.0, k, 2) >= 20);
        assert!(block_side(150.0, k + 1, 2) < 20);
    }
}
