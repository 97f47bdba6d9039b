//! Integer lattice primitives shared by every other module.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `Z^d`.
pub type Point = Vec<i64>;

/// Translation invariant total order on `Z^d`.
///
/// Only the lexicographic order is provided; coordinate 1 is the most
/// significant one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderSpec {
    #[default]
    Lexicographic,
}

impl OrderSpec {
    pub fn cmp(&self, a: &[i64], b: &[i64]) -> Ordering {
        match self {
            OrderSpec::Lexicographic => a.cmp(b),
        }
    }

    /// `a ≺ b`.
    pub fn precedes(&self, a: &[i64], b: &[i64]) -> bool {
        self.cmp(a, b) == Ordering::Less
    }

    /// Whether `offset ≻ 0`, i.e. `v ≺ v + offset` for every `v`.
    pub fn is_positive(&self, offset: &[i64]) -> bool {
        match self {
            OrderSpec::Lexicographic => offset
                .iter()
                .find(|&&o| o != 0)
                .is_some_and(|&o| o > 0),
        }
    }
}

/// Closed integer box `{v : lo ≤ v ≤ hi}` (coordinate-wise). Empty when any
/// `lo_ℓ > hi_ℓ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub lo: Point,
    pub hi: Point,
}

impl LatticeBox {
    pub fn new(lo: Point, hi: Point) -> Self {
        assert_eq!(lo.len(), hi.len(), "box corners of different dimension");
        Self { lo, hi }
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            lo: vec![0; dim],
            hi: vec![-1; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(l, h)| l > h)
    }

    pub fn side(&self, axis: usize) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.hi[axis] - self.lo[axis] + 1) as usize
        }
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        (0..self.dim()).map(|l| self.side(l)).product()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        v.len() == self.dim()
            && v
                .iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (l, h))| l <= x && x <= h)
    }

    pub fn contains_box(&self, other: &LatticeBox) -> bool {
        other.is_empty()
            || (0..self.dim()).all(|l| self.lo[l] <= other.lo[l] && other.hi[l] <= self.hi[l])
    }

    /// Row-major index with the last axis varying fastest, so that index
    /// order is lexicographic order.
    pub fn index_of(&self, v: &[i64]) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        let mut idx = 0usize;
        for (l, (x, lo)) in v.iter().zip(&self.lo).enumerate() {
            idx = idx * self.side(l) + (x - lo) as usize;
        }
        Some(idx)
    }

    pub fn point_at(&self, mut idx: usize) -> Point {
        let d = self.dim();
        let mut p = vec![0; d];
        for l in (0..d).rev() {
            let s = self.side(l);
            p[l] = self.lo[l] + (idx % s) as i64;
            idx /= s;
        }
        p
    }

    /// Index strides per axis for [`LatticeBox::index_of`].
    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = vec![1usize; d];
        for l in (0..d.saturating_sub(1)).rev() {
            s[l] = s[l + 1] * self.side(l + 1);
        }
        s
    }

    pub fn iter(&self) -> BoxIter<'_> {
        BoxIter {
            bx: self,
            next: if self.is_empty() {
                None
            } else {
                Some(self.lo.clone())
            },
        }
    }

    /// Grows the box by `below` on the lower and `above` on the upper faces.
    pub fn expanded(&self, below: &[i64], above: &[i64]) -> LatticeBox {
        let lo = self.lo.iter().zip(below).map(|(l, b)| l - b).collect();
        let hi = self.hi.iter().zip(above).map(|(h, a)| h + a).collect();
        LatticeBox { lo, hi }
    }

    pub fn hull(&self, other: &LatticeBox) -> LatticeBox {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let lo = self.lo.iter().zip(&other.lo).map(|(a, b)| *a.min(b)).collect();
        let hi = self.hi.iter().zip(&other.hi).map(|(a, b)| *a.max(b)).collect();
        LatticeBox { lo, hi }
    }

    pub fn intersection(&self, other: &LatticeBox) -> LatticeBox {
        let lo = self.lo.iter().zip(&other.lo).map(|(a, b)| *a.max(b)).collect();
        let hi = self.hi.iter().zip(&other.hi).map(|(a, b)| *a.min(b)).collect();
        LatticeBox { lo, hi }
    }

    pub fn to_point_set(&self) -> PointSet {
        let mut coords = Vec::with_capacity(self.len() * self.dim());
        for p in self.iter() {
            coords.extend_from_slice(&p);
        }
        PointSet::from_sorted_unchecked(self.dim(), coords)
    }
}

/// Lexicographic iterator over the points of a [`LatticeBox`].
pub struct BoxIter<'a> {
    bx: &'a LatticeBox,
    next: Option<Point>,
}

impl Iterator for BoxIter<'_> {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut l = succ.len();
        loop {
            if l == 0 {
                break;
            }
            l -= 1;
            if succ[l] < self.bx.hi[l] {
                succ[l] += 1;
                self.next = Some(succ);
                break;
            }
            succ[l] = self.bx.lo[l];
        }
        Some(cur)
    }
}

/// Finite subset of `Z^d`, stored flat, sorted lexicographically and without
/// duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    coords: Vec<i64>,
}

impl PointSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            coords: Vec::new(),
        }
    }

    /// Builds a set from arbitrary points; sorts and removes duplicates.
    pub fn from_points<I, P>(dim: usize, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = P>,
        P: AsRef<[i64]>,
    {
        let mut flat = Vec::new();
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        Ok(Self::from_flat(dim, flat))
    }

    /// Sorts and deduplicates a flat coordinate buffer.
    pub fn from_flat(dim: usize, flat: Vec<i64>) -> Self {
        assert!(dim > 0 && flat.len().is_multiple_of(dim));
        let n = flat.len() / dim;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_unstable_by(|&a, &b| flat[a * dim..(a + 1) * dim].cmp(&flat[b * dim..(b + 1) * dim]));
        let mut coords = Vec::with_capacity(flat.len());
        let mut last: Option<usize> = None;
        for i in order {
            let p = &flat[i * dim..(i + 1) * dim];
            if let Some(j) = last {
                if &flat[j * dim..(j + 1) * dim] == p {
                    continue;
                }
            }
            coords.extend_from_slice(p);
            last = Some(i);
        }
        Self { dim, coords }
    }

    /// Caller guarantees strictly increasing lexicographic order.
    pub(crate) fn from_sorted_unchecked(dim: usize, coords: Vec<i64>) -> Self {
        debug_assert!(coords.len().is_multiple_of(dim.max(1)));
        Self { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[i64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub fn position(&self, v: &[i64]) -> Option<usize> {
        if v.len() != self.dim {
            return None;
        }
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.get(mid).cmp(v) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.position(v).is_some()
    }

    /// Smallest lattice box containing the set (empty box for an empty set).
    pub fn bounding_box(&self) -> LatticeBox {
        if self.is_empty() {
            return LatticeBox::empty(self.dim);
        }
        let mut lo = self.get(0).to_vec();
        let mut hi = lo.clone();
        for p in self.iter() {
            for l in 0..self.dim {
                lo[l] = lo[l].min(p[l]);
                hi[l] = hi[l].max(p[l]);
            }
        }
        LatticeBox { lo, hi }
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut flat = self.coords.clone();
        flat.extend_from_slice(&other.coords);
        PointSet::from_flat(self.dim, flat)
    }

    pub fn is_subset_of(&self, other: &PointSet) -> bool {
        self.iter().all(|p| other.contains(p))
    }

    pub fn to_vec(&self) -> Vec<Point> {
        self.iter().map(<[i64]>::to_vec).collect()
    }
}

/// `|D ⊕ B|` by exact enumeration of all sums with deduplication.
pub fn minkowski_sum_count(set: &PointSet, summand: &PointSet) -> Result<usize> {
    if summand.is_empty() {
        return Err(Error::EmptySummand);
    }
    if set.dim() != summand.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: summand.dim(),
        });
    }
    let d = set.dim();
    let mut flat = Vec::with_capacity(set.len() * summand.len() * d);
    for p in set.iter() {
        for b in summand.iter() {
            flat.extend(p.iter().zip(b).map(|(x, y)| x + y));
        }
    }
    Ok(PointSet::from_flat(d, flat).len())
}

/// Shape of an order-successor neighbourhood.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NeighborhoodMode {
    /// `v + [-m, m]^d`.
    Fixed(u32),
    /// `v + t[-1, 1]^d` for a block side vector `t`.
    Block(Vec<i64>),
}

/// `{z ∈ v + box : v ≺ z}`, stored as its half-widths so that membership
/// tests on offsets are O(d).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderNeighborhood {
    radius: Vec<i64>,
    order: OrderSpec,
}

impl OrderNeighborhood {
    pub fn new(dim: usize, mode: &NeighborhoodMode, order: OrderSpec) -> Self {
        let radius = match mode {
            NeighborhoodMode::Fixed(m) => vec![*m as i64; dim],
            NeighborhoodMode::Block(t) => {
                assert_eq!(t.len(), dim);
                t.clone()
            }
        };
        Self { radius, order }
    }

    pub fn radius(&self) -> &[i64] {
        &self.radius
    }

    pub fn len(&self) -> usize {
        let full: usize = self.radius.iter().map(|r| (2 * r + 1) as usize).product();
        (full - 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether `v + offset` belongs to the neighbourhood of `v`.
    pub fn contains_offset(&self, offset: &[i64]) -> bool {
        offset.iter().zip(&self.radius).all(|(o, r)| o.abs() <= *r) && self.order.is_positive(offset)
    }

    /// Offsets of the neighbourhood in lexicographic order.
    pub fn offsets(&self) -> Vec<Point> {
        let bx = LatticeBox::new(self.radius.iter().map(|r| -r).collect(), self.radius.clone());
        bx.iter().filter(|o| self.order.is_positive(o)).collect()
    }

    pub fn points_around(&self, v: &[i64]) -> Vec<Point> {
        self.offsets()
            .into_iter()
            .map(|o| o.iter().zip(v).map(|(a, b)| a + b).collect())
            .collect()
    }
}

/// Points of `v + box` strictly after `v` in the given order.
pub fn order_neighborhood(v: &[i64], mode: &NeighborhoodMode, order: OrderSpec) -> Vec<Point> {
    OrderNeighborhood::new(v.len(), mode, order).points_around(v)
}
