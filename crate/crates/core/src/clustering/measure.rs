use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::family::RealizedFamily;
use super::query::RegionQuery;
use super::union_find::UnionFind;
use crate::error::{Error, Result};
use crate::fields::FieldSample;
use crate::geometry::{BlockPartition, ScalingVector};
use crate::lattice::{LatticeBox, Point, PointSet};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterKind {
    /// One cluster per exceeding block, `N_n`.
    Grid,
    /// Chain-connected exceedances, `Ñ_n`.
    Distance,
    /// Every exceedance on its own, `N̄_n`.
    Exceedance,
}

impl ClusterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Grid => "grid",
            Self::Distance => "distance",
            Self::Exceedance => "exceedance",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster<T> {
    /// Cluster point on the rescaled (`C`) scale.
    pub representative: Vec<T>,
    /// Original-scale lattice point the cluster is attributed to.
    pub anchor: Point,
    /// Exceeding lattice points, lexicographically sorted.
    pub members: Vec<Point>,
}

impl<T> Cluster<T> {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct ClusterMetadata<T> {
    pub threshold: T,
    pub k: Option<u64>,
    pub t: Option<Vec<i64>>,
    pub scale: Vec<T>,
}

/// A realisation of `N_n`, `Ñ_n` or `N̄_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMeasure<T> {
    pub kind: ClusterKind,
    pub clusters: Vec<Cluster<T>>,
    pub metadata: ClusterMetadata<T>,
}

impl<T: Scalar> ClusterMeasure<T> {
    /// Total count `X`.
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Cluster::size).collect()
    }

    /// Number of exceedances across all clusters.
    pub fn total_size(&self) -> usize {
        self.clusters.iter().map(Cluster::size).sum()
    }

    /// Number of cluster points in `query`.
    pub fn count(&self, query: &RegionQuery) -> usize {
        let mut buf = Vec::new();
        self.clusters
            .iter()
            .filter(|c| {
                buf.clear();
                buf.extend(c.representative.iter().map(|x| x.as_f64()));
                query.contains(&buf)
            })
            .count()
    }

    /// Original-scale counts `(L(B_n^g))_g`: clusters whose anchor lies in
    /// `B_n^g`.
    pub fn original_scale_counts(&self, family: &RealizedFamily) -> Vec<usize> {
        let mut counts = vec![0; family.len()];
        for c in &self.clusters {
            if let Some(g) = family.member_of(&c.anchor) {
                counts[g] += 1;
            }
        }
        counts
    }

    /// One cluster chosen uniformly with `rng`.
    pub fn uniform_cluster<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<&Cluster<T>> {
        if self.clusters.is_empty() {
            return Err(Error::NoClusters);
        }
        Ok(&self.clusters[rng.gen_range(0..self.clusters.len())])
    }
}

/// Lattice points `v ∈ bx` with `ξ_v > x`, lexicographic.
fn box_exceedances<T: Scalar>(sample: &FieldSample<T>, bx: &LatticeBox, x: T, out: &mut Vec<Point>) -> Result<()> {
    sample.check_covers_box(bx)?;
    for v in bx.iter() {
        if sample.get(&v).expect("covered") > x {
            out.push(v);
        }
    }
    Ok(())
}

/// Exceedances of `x` per anchored block `z ∈ Q⁻`, in the order of `Q⁻`.
pub fn block_exceedances<T: Scalar>(sample: &FieldSample<T>, x: T, partition: &BlockPartition) -> Result<Vec<Vec<Point>>> {
    if sample.dim() != partition.dim() {
        return Err(Error::PartitionMismatch(format!(
            "sample has dimension {}, partition {}",
            sample.dim(),
            partition.dim()
        )));
    }
    partition
        .anchored
        .iter()
        .map(|z| {
            let bx = partition.block(z);
            if sample.exceedances_in_box(&bx, x)? == 0 {
                return Ok(Vec::new());
            }
            let mut out = Vec::new();
            box_exceedances(sample, &bx, x, &mut out)?;
            Ok(out)
        })
        .collect()
}

/// Lattice points `v ∈ region` with `ξ_v > x`.
pub fn exceedance_lattice_points<T: Scalar>(sample: &FieldSample<T>, x: T, region: &PointSet) -> Result<Vec<Point>> {
    sample.check_covers(region)?;
    Ok(region
        .iter()
        .filter(|v| sample.get(v).expect("covered") > x)
        .map(<[i64]>::to_vec)
        .collect())
}

/// `{v / c_n : v ∈ region, ξ_v > x}`.
pub fn exceedance_points<T: Scalar>(
    sample: &FieldSample<T>,
    x: T,
    region: &PointSet,
    rescale: &ScalingVector<T>,
) -> Result<Vec<Vec<T>>> {
    Ok(exceedance_lattice_points(sample, x, region)?
        .iter()
        .map(|v| rescale.rescale(v))
        .collect())
}

fn metadata<T: Scalar>(x: T, partition: Option<&BlockPartition>, rescale: &ScalingVector<T>) -> ClusterMetadata<T> {
    ClusterMetadata {
        threshold: x,
        k: partition.map(|p| p.k),
        t: partition.map(|p| p.t.clone()),
        scale: rescale.entries().to_vec(),
    }
}

/// `N_n`: one cluster per `z ∈ Q⁻` with `M_ξ(J_z) > x`, at `z t / c_n`.
pub fn grid_clusters<T: Scalar>(
    sample: &FieldSample<T>,
    x: T,
    partition: &BlockPartition,
    rescale: &ScalingVector<T>,
) -> Result<ClusterMeasure<T>> {
    let per_block = block_exceedances(sample, x, partition)?;
    Ok(grid_from_blocks(per_block, x, partition, rescale))
}

pub(crate) fn grid_from_blocks<T: Scalar>(
    per_block: Vec<Vec<Point>>,
    x: T,
    partition: &BlockPartition,
    rescale: &ScalingVector<T>,
) -> ClusterMeasure<T> {
    let clusters = partition
        .anchored
        .iter()
        .zip(per_block)
        .filter(|(_, m)| !m.is_empty())
        .map(|(z, members)| Cluster {
            representative: partition.corner_rescaled(z, rescale),
            anchor: partition.corner(z),
            members,
        })
        .collect();
    ClusterMeasure {
        kind: ClusterKind::Grid,
        clusters,
        metadata: metadata(x, Some(partition), rescale),
    }
}

/// Squared distance between `v / c` and `w / c`.
#[inline]
pub fn rescaled_distance_sq(v: &[i64], w: &[i64], inv_c: &[f64]) -> f64 {
    v.iter()
        .zip(w)
        .zip(inv_c)
        .map(|((a, b), s)| {
            let d = (a - b) as f64 * s;
            d * d
        })
        .sum()
}

/// Components of `points` (lexicographically sorted lattice points) under
/// chaining with rescaled steps `≤ h`. Buckets of side `h` restrict the
/// search to adjacent cells.
pub fn chain_components(points: &PointSet, scale: &[f64], h: f64) -> Vec<Vec<usize>> {
    let d = points.dim();
    let n = points.len();
    let inv_c: Vec<f64> = scale.iter().map(|c| 1.0 / c).collect();
    let h2 = h * h;
    let bucket_of = |v: &[i64]| -> Vec<i64> {
        v.iter()
            .zip(&inv_c)
            .map(|(x, s)| (*x as f64 * s / h).floor() as i64)
            .collect()
    };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, v) in points.iter().enumerate() {
        buckets.entry(bucket_of(v)).or_default().push(i);
    }
    let mut uf = UnionFind::new(n);
    let around = LatticeBox::new(vec![-1; d], vec![1; d]);
    let mut key = vec![0; d];
    for (i, v) in points.iter().enumerate() {
        let b = bucket_of(v);
        for off in around.iter() {
            for l in 0..d {
                key[l] = b[l] + off[l];
            }
            if let Some(list) = buckets.get(&key) {
                for &j in list {
                    if j > i && rescaled_distance_sq(v, points.get(j), &inv_c) <= h2 {
                        uf.union(i, j);
                    }
                }
            }
        }
    }
    uf.components()
}

/// Index of the member minimising the sum of squared rescaled distances to
/// the others; the first (lexicographically smallest) minimiser wins.
pub fn central_member(members: &[&[i64]], scale: &[f64]) -> usize {
    let d = scale.len();
    let n = members.len() as i128;
    let mut s = vec![0i128; d];
    let mut q = vec![0i128; d];
    for m in members {
        for l in 0..d {
            let x = m[l] as i128;
            s[l] += x;
            q[l] += x * x;
        }
    }
    let isotropic = scale.iter().all(|c| *c == scale[0]);
    let axis_cost = |v: &[i64], l: usize| {
        let x = v[l] as i128;
        n * x * x - 2 * x * s[l] + q[l]
    };
    if isotropic {
        let cost = |v: &[i64]| (0..d).map(|l| axis_cost(v, l)).sum::<i128>();
        (0..members.len()).min_by_key(|i| (cost(members[*i]), *i)).unwrap()
    } else {
        let w: Vec<f64> = scale.iter().map(|c| 1.0 / (c * c)).collect();
        let cost = |v: &[i64]| (0..d).map(|l| axis_cost(v, l) as f64 * w[l]).sum::<f64>();
        let mut best = 0;
        let mut best_cost = cost(members[0]);
        for (i, m) in members.iter().enumerate().skip(1) {
            let c = cost(m);
            if c < best_cost {
                best = i;
                best_cost = c;
            }
        }
        best
    }
}

/// `Ñ_n` over `Φ_n`, the rescaled exceedances in `D̃`.
pub fn distance_clusters<T: Scalar>(
    sample: &FieldSample<T>,
    x: T,
    partition: &BlockPartition,
    rescale: &ScalingVector<T>,
) -> Result<ClusterMeasure<T>> {
    let per_block = block_exceedances(sample, x, partition)?;
    Ok(distance_from_blocks(&per_block, x, partition, rescale))
}

pub(crate) fn distance_from_blocks<T: Scalar>(
    per_block: &[Vec<Point>],
    x: T,
    partition: &BlockPartition,
    rescale: &ScalingVector<T>,
) -> ClusterMeasure<T> {
    let d = partition.dim();
    let phi = PointSet::from_flat(d, per_block.iter().flatten().flatten().copied().collect());
    let scale: Vec<f64> = rescale.entries().iter().map(|c| c.as_f64()).collect();
    let comps = chain_components(&phi, &scale, partition.distance_threshold());
    let clusters = comps
        .into_iter()
        .map(|idx| {
            let members: Vec<&[i64]> = idx.iter().map(|i| phi.get(*i)).collect();
            let rep = members[central_member(&members, &scale)];
            Cluster {
                representative: rescale.rescale(rep),
                anchor: rep.to_vec(),
                members: members.iter().map(|m| m.to_vec()).collect(),
            }
        })
        .collect();
    ClusterMeasure {
        kind: ClusterKind::Distance,
        clusters,
        metadata: metadata(x, Some(partition), rescale),
    }
}

/// `N̄_n`: every exceedance in `region` is a cluster of size one.
pub fn exceedance_clusters<T: Scalar>(
    sample: &FieldSample<T>,
    x: T,
    region: &PointSet,
    rescale: &ScalingVector<T>,
) -> Result<ClusterMeasure<T>> {
    Ok(exceedance_from_points(exceedance_lattice_points(sample, x, region)?, x, rescale))
}

pub(crate) fn exceedance_from_points<T: Scalar>(points: Vec<Point>, x: T, rescale: &ScalingVector<T>) -> ClusterMeasure<T> {
    let clusters = points
        .into_iter()
        .map(|v| Cluster {
            representative: rescale.rescale(&v),
            anchor: v.clone(),
            members: vec![v],
        })
        .collect();
    ClusterMeasure {
        kind: ClusterKind::Exceedance,
        clusters,
        metadata: metadata(x, None, rescale),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FieldModel, MarginalDistribution};
    use crate::geometry::{ConvexBody, LatticeRegion, PConvexSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (LatticeRegion<f64>, BlockPartition) {
        let region = LatticeRegion::new(
            PConvexSet::single(ConvexBody::unit_cube(2)).unwrap(),
            ScalingVector::isotropic(100.0, 2).unwrap(),
        )
        .unwrap();
        let part = BlockPartition::build(&region, 25).unwrap();
        (region, part)
    }

    /// Uniform field with values set explicitly at `hot` (1.0) and 0 elsewhere.
    fn planted(part: &BlockPartition, hot: &[[i64; 2]]) -> FieldSample<f64> {
        let support = part.d_tilde();
        let values: Vec<f64> = support
            .iter()
            .map(|v| if hot.iter().any(|h| h == v) { 1.0 } else { 0.0 })
            .collect();
        FieldSample::from_points(&support, &values, FieldModel::iid(MarginalDistribution::Uniform), 0, 0).unwrap()
    }

    #[test]
    fn grid_examples() {
        let (region, part) = setup();
        let c = region.scale();
        assert_eq!(grid_clusters(&planted(&part, &[]), 0.5, &part, c).unwrap().len(), 0);

        let m = grid_clusters(&planted(&part, &[[45, 67]]), 0.5, &part, c).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.sizes(), vec![1]);
        assert_eq!(m.clusters[0].representative, vec![0.4, 0.6]);
        assert_eq!(m.clusters[0].anchor, vec![40, 60]);

        let m = grid_clusters(&planted(&part, &[[41, 61], [59, 79]]), 0.5, &part, c).unwrap();
        assert_eq!((m.len(), m.total_size()), (1, 2));
    }

    #[test]
    fn distance_examples() {
        let (region, part) = setup();
        let c = region.scale();
        // threshold √2/5 ≈ 0.283
        let m = distance_clusters(&planted(&part, &[[10, 10], [11, 10]]), 0.5, &part, c).unwrap();
        assert_eq!(m.sizes(), vec![2]);
        let m = distance_clusters(&planted(&part, &[[10, 10], [60, 10]]), 0.5, &part, c).unwrap();
        assert_eq!(m.sizes(), vec![1, 1]);
        // chains across blocks
        let m = distance_clusters(&planted(&part, &[[10, 10], [30, 20], [50, 30]]), 0.5, &part, c).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.clusters[0].anchor, vec![30, 20]);
    }

    #[test]
    fn central_member_examples() {
        let s = [10.0, 10.0];
        assert_eq!(central_member(&[&[0, 0], &[1, 0], &[2, 0]], &s), 1);
        assert_eq!(central_member(&[&[0, 0], &[1, 0]], &s), 0);
        assert_eq!(central_member(&[&[0, 0], &[1, 0]], &[10.0, 3.0]), 0);
        assert_eq!(central_member(&[&[0, 0], &[0, 5], &[1, 1]], &[1.0, 100.0]), 0);
    }

    #[test]
    fn counts_and_queries() {
        let (region, part) = setup();
        let c = region.scale();
        let s = planted(&part, &[[10, 10], [60, 10], [90, 95]]);
        let m = exceedance_clusters(&s, 0.5, region.points(), c).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.count(&RegionQuery::everything(2)), 3);
        assert_eq!(m.count(&RegionQuery::empty()), 0);
        let left = RegionQuery::single(vec![-1.0, -1.0], vec![0.5, 2.0]).unwrap();
        let right = RegionQuery::single(vec![0.5, -1.0], vec![2.0, 2.0]).unwrap();
        assert_eq!(m.count(&left) + m.count(&right), 3);
        assert_eq!(m.count(&left), 1);
    }

    #[test]
    fn uniform_cluster_frequencies() {
        let (region, part) = setup();
        let s = planted(&part, &[[10, 10], [60, 10], [90, 95]]);
        let m = exceedance_clusters(&s, 0.5, region.points(), region.scale()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut hits = [0usize; 3];
        let n = 30_000;
        for _ in 0..n {
            let c = m.uniform_cluster(&mut rng).unwrap();
            hits[m.clusters.iter().position(|d| d == c).unwrap()] += 1;
        }
        for h in hits {
            assert!((h as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02);
        }
        let empty = exceedance_clusters(&s, 2.0, region.points(), region.scale()).unwrap();
        assert!(matches!(empty.uniform_cluster(&mut rng), Err(Error::NoClusters)));
        let one = exceedance_clusters(&planted(&part, &[[5, 5]]), 0.5, region.points(), region.scale()).unwrap();
        assert_eq!(one.uniform_cluster(&mut rng).unwrap().anchor, vec![5, 5]);
    }

    #[test]
    fn uncovered_partition_is_reported() {
        let (region, part) = setup();
        let small = LatticeBox::new(vec![0, 0], vec![50, 50]).to_point_set();
        let values = vec![0.0; small.len()];
        let s = FieldSample::from_points(&small, &values, FieldModel::iid(MarginalDistribution::Uniform), 0, 0).unwrap();
        assert!(matches!(
            grid_clusters(&s, 0.5, &part, region.scale()),
            Err(Error::NotCovered { .. })
        ));
    }
}
