use serde::{Deserialize, Serialize};

use super::marginal::MarginalDistribution;
use super::noise::{NoiseKey, Stream};
use crate::error::{Error, Result};
use crate::geometry::DependenceSpec;
use crate::lattice::{minkowski_sum_count, LatticeBox, Point, PointSet};
use crate::Scalar;

/// Stationary field on `Z^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields, bound = "T: Scalar")]
pub enum FieldModel<T> {
    /// Independent draws from `marginal`.
    Iid { marginal: MarginalDistribution<T> },
    /// `ξ_v = max_{z ∈ v + B} Y_z` with `Y_z` i.i.d. `F^{1/|B|}`.
    MovingMaximum {
        pattern: Vec<Point>,
        marginal: MarginalDistribution<T>,
    },
}

impl<T: Scalar> FieldModel<T> {
    pub fn iid(marginal: MarginalDistribution<T>) -> Self {
        Self::Iid { marginal }
    }

    pub fn moving_maximum(pattern: Vec<Point>, marginal: MarginalDistribution<T>) -> Self {
        Self::MovingMaximum { pattern, marginal }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        self.marginal().validate()?;
        if let Self::MovingMaximum { pattern, .. } = self {
            if pattern.is_empty() {
                return Err(Error::InvalidModel("moving-maximum pattern is empty".into()));
            }
            if let Some(b) = pattern.iter().find(|b| b.len() != dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: b.len(),
                });
            }
            if PointSet::from_points(dim, pattern.iter())?.len() != pattern.len() {
                return Err(Error::InvalidModel("moving-maximum pattern has duplicates".into()));
            }
        }
        Ok(())
    }

    pub fn marginal(&self) -> &MarginalDistribution<T> {
        match self {
            Self::Iid { marginal } | Self::MovingMaximum { marginal, .. } => marginal,
        }
    }

    /// `|B|`, with `B = {0}` for i.i.d. fields.
    pub fn pattern_len(&self) -> usize {
        match self {
            Self::Iid { .. } => 1,
            Self::MovingMaximum { pattern, .. } => pattern.len(),
        }
    }

    pub fn pattern_set(&self, dim: usize) -> PointSet {
        match self {
            Self::Iid { .. } => PointSet::from_flat(dim, vec![0; dim]),
            Self::MovingMaximum { pattern, .. } => PointSet::from_flat(dim, pattern.concat()),
        }
    }

    /// Per-axis minimum and maximum of the pattern.
    pub fn pattern_extent(&self, dim: usize) -> (Vec<i64>, Vec<i64>) {
        match self {
            Self::Iid { .. } => (vec![0; dim], vec![0; dim]),
            Self::MovingMaximum { pattern, .. } => (
                (0..dim).map(|l| pattern.iter().map(|b| b[l]).min().unwrap_or(0)).collect(),
                (0..dim).map(|l| pattern.iter().map(|b| b[l]).max().unwrap_or(0)).collect(),
            ),
        }
    }

    /// `m = max_{b,b' ∈ B} max_ℓ |b_ℓ - b'_ℓ|`.
    pub fn dependence_range(&self, dim: usize) -> u32 {
        let (lo, hi) = self.pattern_extent(dim);
        lo.iter().zip(&hi).map(|(a, b)| (b - a) as u32).max().unwrap_or(0)
    }

    /// `(m, (m, …, m), 0)`.
    pub fn dependence(&self, dim: usize) -> DependenceSpec {
        DependenceSpec::m_dependent(self.dependence_range(dim), dim)
    }

    /// Extremal index: `1` for i.i.d., `1/|B|` for moving maxima.
    pub fn theoretical_theta(&self) -> Result<f64> {
        Ok(1.0 / self.pattern_len() as f64)
    }

    /// `P(max_{v ∈ D} ξ_v ≤ x)`: `F(x)^{|D|}` or `F(x)^{|D ⊕ B| / |B|}`.
    pub fn exact_max_cdf(&self, region: &PointSet, x: T) -> Result<f64> {
        let exponent = match self {
            Self::Iid { .. } => region.len() as f64,
            Self::MovingMaximum { .. } => {
                let b = self.pattern_set(region.dim());
                minkowski_sum_count(region, &b)? as f64 / b.len() as f64
            }
        };
        let f = self.marginal().cdf(x).as_f64();
        if f <= 0.0 {
            return Ok(if exponent == 0.0 { 1.0 } else { 0.0 });
        }
        Ok((exponent * f.ln()).exp())
    }
}

/// Realised values `ξ_v` on a finite lattice set, stored densely over its
/// bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample<T> {
    domain: LatticeBox,
    values: Vec<T>,
    mask: Option<Vec<bool>>,
    seed: u64,
    replication: u64,
    model: FieldModel<T>,
}

impl<T: Scalar> FieldSample<T> {
    /// Assembles a sample from values listed for the points of `support` in
    /// lexicographic order.
    pub fn from_points(support: &PointSet, values: &[T], model: FieldModel<T>, seed: u64, replication: u64) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        if support.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} points",
                values.len(),
                support.len()
            )));
        }
        let domain = support.bounding_box();
        let mut dense = vec![T::nan(); domain.len()];
        let mut mask = vec![false; domain.len()];
        for (v, x) in support.iter().zip(values) {
            let i = domain.index_of(v).expect("point inside its bounding box");
            dense[i] = *x;
            mask[i] = true;
        }
        let mask = (support.len() != domain.len()).then_some(mask);
        Ok(Self {
            domain,
            values: dense,
            mask,
            seed,
            replication,
            model,
        })
    }

    pub fn domain(&self) -> &LatticeBox {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replication(&self) -> u64 {
        self.replication
    }

    pub fn model(&self) -> &FieldModel<T> {
        &self.model
    }

    /// Dense values over [`FieldSample::domain`]; entries outside the support
    /// are NaN.
    pub fn raw_values(&self) -> &[T] {
        &self.values
    }

    /// Number of support points.
    pub fn len(&self) -> usize {
        match &self.mask {
            None => self.values.len(),
            Some(m) => m.iter().filter(|b| **b).count(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn in_support(&self, i: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[i])
    }

    pub fn covers(&self, v: &[i64]) -> bool {
        self.domain.index_of(v).is_some_and(|i| self.in_support(i))
    }

    pub fn get(&self, v: &[i64]) -> Option<T> {
        let i = self.domain.index_of(v)?;
        self.in_support(i).then(|| self.values[i])
    }

    /// Support points and values in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Point, T)> + '_ {
        self.domain
            .iter()
            .zip(0..)
            .filter(|(_, i)| self.in_support(*i))
            .map(|(v, i)| (v, self.values[i]))
    }

    /// Errors with the missing points when `region` is not inside the support.
    pub fn check_covers(&self, region: &PointSet) -> Result<()> {
        let mut missing = region.iter().filter(|v| !self.covers(v));
        match missing.next() {
            None => Ok(()),
            Some(first) => Err(Error::NotCovered {
                missing: 1 + missing.count(),
                example: first.to_vec(),
            }),
        }
    }

    pub fn check_covers_box(&self, bx: &LatticeBox) -> Result<()> {
        if bx.is_empty() {
            return Ok(());
        }
        if self.mask.is_none() && self.domain.contains_box(bx) {
            return Ok(());
        }
        self.check_covers(&bx.to_point_set())
    }

    /// `M_ξ(D) = max_{v ∈ D} ξ_v`, `-∞` for an empty set.
    pub fn max_over(&self, region: &PointSet) -> Result<T> {
        self.check_covers(region)?;
        Ok(region
            .iter()
            .map(|v| self.values[self.domain.index_of(v).unwrap()])
            .fold(T::neg_infinity(), T::max))
    }

    /// `M_ξ` over a lattice box inside the support.
    pub fn max_over_box(&self, bx: &LatticeBox) -> Result<T> {
        self.check_covers_box(bx)?;
        let mut m = T::neg_infinity();
        for_each_row(bx, |first, len| {
            let i = self.domain.index_of(first).unwrap();
            m = self.values[i..i + len].iter().copied().fold(m, T::max);
        });
        Ok(m)
    }

    /// Number of `v ∈ bx` with `ξ_v > x`.
    pub fn exceedances_in_box(&self, bx: &LatticeBox, x: T) -> Result<usize> {
        self.check_covers_box(bx)?;
        let mut n = 0;
        for_each_row(bx, |first, len| {
            let i = self.domain.index_of(first).unwrap();
            n += self.values[i..i + len].iter().filter(|y| **y > x).count();
        });
        Ok(n)
    }
}

/// Calls `f(first point, row length)` for each row of `bx` along the last
/// axis.
pub(crate) fn for_each_row(bx: &LatticeBox, mut f: impl FnMut(&[i64], usize)) {
    if bx.is_empty() {
        return;
    }
    let d = bx.dim();
    let len = bx.side(d - 1);
    let mut prefix = bx.lo.clone();
    loop {
        f(&prefix, len);
        let mut l = d - 1;
        loop {
            if l == 0 {
                return;
            }
            l -= 1;
            if prefix[l] < bx.hi[l] {
                prefix[l] += 1;
                break;
            }
            prefix[l] = bx.lo[l];
        }
    }
}

/// Driving noise `Y_z = F^{-1}(u_z^{b})` over `bx`, `u_z` keyed by `z`.
fn noise_on_box<T: Scalar>(marginal: &MarginalDistribution<T>, b: usize, bx: &LatticeBox, key: NoiseKey) -> Vec<T> {
    let d = bx.dim();
    let b = b as f64;
    let mut out = Vec::with_capacity(bx.len());
    for_each_row(bx, |first, len| {
        let row = key.prefix(&first[..d - 1]);
        let start = first[d - 1];
        out.extend((0..len as i64).map(|j| {
            let u = row.uniform_last(start + j);
            marginal.quantile_of_log(T::lit(b * u.ln()))
        }));
    });
    out
}

/// Simulates `model` on every point of a lattice box.
pub fn simulate_box<T: Scalar>(model: &FieldModel<T>, domain: &LatticeBox, seed: u64, replication: u64) -> Result<FieldSample<T>> {
    if domain.is_empty() {
        return Err(Error::EmptySupport);
    }
    let d = domain.dim();
    model.validate(d)?;
    let key = NoiseKey::new(seed, replication, Stream::Field);
    let values = match model {
        FieldModel::Iid { marginal } => noise_on_box(marginal, 1, domain, key),
        FieldModel::MovingMaximum { pattern, marginal } => {
            let (lo, hi) = model.pattern_extent(d);
            let below: Vec<i64> = lo.iter().map(|x| -x).collect();
            let noise_box = domain.expanded(&below, &hi);
            let noise = noise_on_box(marginal, pattern.len(), &noise_box, key);
            let strides = noise_box.strides();
            let offsets: Vec<isize> = pattern
                .iter()
                .map(|b| b.iter().zip(&strides).map(|(x, s)| *x as isize * *s as isize).sum())
                .collect();
            let mut values = Vec::with_capacity(domain.len());
            for_each_row(domain, |first, len| {
                let base = noise_box.index_of(first).unwrap() as isize;
                values.extend((0..len as isize).map(|j| {
                    offsets
                        .iter()
                        .map(|o| noise[(base + j + o) as usize])
                        .fold(T::neg_infinity(), T::max)
                }));
            });
            values
        }
    };
    Ok(FieldSample {
        domain: domain.clone(),
        values,
        mask: None,
        seed,
        replication,
        model: model.clone(),
    })
}

/// Simulates `model` on a finite lattice set. Values are a function of
/// `(seed, replication, coordinate)` only.
pub fn simulate<T: Scalar>(model: &FieldModel<T>, support: &PointSet, seed: u64, replication: u64) -> Result<FieldSample<T>> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let domain = support.bounding_box();
    let mut sample = simulate_box(model, &domain, seed, replication)?;
    if support.len() != domain.len() {
        let mut mask = vec![false; domain.len()];
        for v in support.iter() {
            mask[domain.index_of(v).unwrap()] = true;
        }
        for (x, keep) in sample.values.iter_mut().zip(&mask) {
            if !keep {
                *x = T::nan();
            }
        }
        sample.mask = Some(mask);
    }
    Ok(sample)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frechet_mm(pattern: Vec<Point>) -> FieldModel<f64> {
        FieldModel::moving_maximum(pattern, MarginalDistribution::Frechet)
    }

    fn square(n: i64) -> LatticeBox {
        LatticeBox::new(vec![0, 0], vec![n - 1, n - 1])
    }

    #[test]
    fn singleton_pattern_is_iid() {
        let bx = square(20);
        let a = simulate_box(&frechet_mm(vec![vec![0, 0]]), &bx, 5, 2).unwrap();
        let b = simulate_box(&FieldModel::iid(MarginalDistribution::<f64>::Frechet), &bx, 5, 2).unwrap();
        assert_eq!(a.raw_values(), b.raw_values());
    }

    #[test]
    fn windows_share_noise() {
        let model = frechet_mm(vec![vec![0, 0], vec![1, 0]]);
        let bx = square(8);
        let s = simulate_box(&model, &bx, 11, 0).unwrap();
        let key = NoiseKey::new(11, 0, Stream::Field);
        let y = |z: &[i64]| MarginalDistribution::<f64>::Frechet.quantile_of_log(2.0 * key.uniform(z).ln());
        for v in bx.iter() {
            let want = y(&v).max(y(&[v[0] + 1, v[1]]));
            assert_eq!(s.get(&v).unwrap(), want);
        }
        // ξ_(0,0) and ξ_(1,0) share Y_(1,0)
        let shared = y(&[1, 0]);
        assert!(s.get(&[0, 0]).unwrap() >= shared && s.get(&[1, 0]).unwrap() >= shared);
    }

    #[test]
    fn subset_support_agrees_with_box() {
        let model = frechet_mm(vec![vec![0, 0], vec![0, 1], vec![-1, 0]]);
        let full = simulate_box(&model, &square(12), 3, 9).unwrap();
        let sub = PointSet::from_points(2, [[2, 3], [7, 1], [11, 11]]).unwrap();
        let part = simulate(&model, &sub, 3, 9).unwrap();
        assert_eq!(part.len(), 3);
        for v in sub.iter() {
            assert_eq!(part.get(v), full.get(v));
        }
        assert!(part.get(&[5, 5]).is_none());
        assert!(matches!(
            part.check_covers(&PointSet::from_points(2, [[5, 5]]).unwrap()),
            Err(Error::NotCovered { missing: 1, .. })
        ));
    }

    #[test]
    fn determinism_and_replication_independence() {
        let model = frechet_mm(vec![vec![0, 0], vec![1, 0]]);
        let a = simulate_box(&model, &square(30), 1, 0).unwrap();
        let b = simulate_box(&model, &square(30), 1, 0).unwrap();
        let c = simulate_box(&model, &square(30), 1, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.raw_values(), c.raw_values());
    }

    #[test]
    fn exact_max_cdf_examples() {
        let d = LatticeBox::new(vec![0, 0], vec![99, 99]).to_point_set();
        let iid = FieldModel::iid(MarginalDistribution::Uniform);
        let p = iid.exact_max_cdf(&d, 0.9999).unwrap();
        assert!((p - 0.9999f64.powi(10_000)).abs() < 1e-12);
        assert!((p - 0.367_861).abs() < 1e-5);

        let d = square(10).to_point_set();
        let mm = FieldModel::moving_maximum(vec![vec![0, 0], vec![1, 0]], MarginalDistribution::Uniform);
        let p = mm.exact_max_cdf(&d, 0.99).unwrap();
        assert!((p - 0.99f64.powi(55)).abs() < 1e-12);
        assert!((p - 0.5754).abs() < 1e-4);
        assert_eq!(frechet_mm(vec![vec![0, 0], vec![1, 0]]).exact_max_cdf(&d, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn theta_and_dependence() {
        let two = frechet_mm(vec![vec![0, 0], vec![1, 0]]);
        assert_eq!(two.theoretical_theta().unwrap(), 0.5);
        assert_eq!(FieldModel::iid(MarginalDistribution::<f64>::Frechet).theoretical_theta().unwrap(), 1.0);
        assert_eq!(frechet_mm(vec![vec![3, 3]]).theoretical_theta().unwrap(), 1.0);
        assert_eq!(two.dependence(2), DependenceSpec::m_dependent(1, 2));
        let wide = frechet_mm(vec![vec![0, -2], vec![1, 1]]);
        assert_eq!(wide.dependence_range(2), 3);
    }

    #[test]
    fn invalid_patterns() {
        assert!(frechet_mm(vec![]).validate(2).is_err());
        assert!(frechet_mm(vec![vec![0, 0], vec![0, 0]]).validate(2).is_err());
        assert!(frechet_mm(vec![vec![0]]).validate(2).is_err());
        assert!(matches!(
            simulate_box(&frechet_mm(vec![vec![0, 0]]), &LatticeBox::empty(2), 0, 0),
            Err(Error::EmptySupport)
        ));
    }

    #[test]
    fn box_helpers() {
        let s = simulate_box(&FieldModel::iid(MarginalDistribution::Uniform), &square(10), 2, 0).unwrap();
        let bx = LatticeBox::new(vec![2, 3], vec![5, 8]);
        let brute = bx.iter().map(|v| s.get(&v).unwrap()).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(s.max_over_box(&bx).unwrap(), brute);
        assert_eq!(s.max_over(&bx.to_point_set()).unwrap(), brute);
        let n = bx.iter().filter(|v| s.get(v).unwrap() > 0.5).count();
        assert_eq!(s.exceedances_in_box(&bx, 0.5).unwrap(), n);
        assert!(s.max_over_box(&LatticeBox::new(vec![8, 8], vec![10, 10])).is_err());
    }
}
