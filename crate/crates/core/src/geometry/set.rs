use serde::{Deserialize, Serialize};

use super::body::ConvexBody;
use crate::error::{Error, Result};
use crate::Scalar;

/// Grid resolution (cells per axis, as a power of two) used for the volume of
/// overlapping non-box unions.
pub const QUADRATURE_LEVEL: u32 = 10;
const QUADRATURE_LEVEL_HIGH_DIM: u32 = 7;
const BISECTION_DEPTH: u32 = 8;

/// Finite union of convex bodies in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct PConvexSet<T> {
    pub bodies: Vec<ConvexBody<T>>,
}

impl<T: Scalar> PConvexSet<T> {
    pub fn new(bodies: Vec<ConvexBody<T>>) -> Result<Self> {
        let set = Self { bodies };
        set.validate()?;
        Ok(set)
    }

    pub fn single(body: ConvexBody<T>) -> Result<Self> {
        Self::new(vec![body])
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .bodies
            .first()
            .ok_or_else(|| Error::InvalidGeometry("a p-convex set needs at least one body".into()))?;
        let d = first.dim();
        for b in &self.bodies {
            b.validate()?;
            if b.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: b.dim(),
                });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.bodies[0].dim()
    }

    /// `p`, the number of bodies.
    pub fn p(&self) -> usize {
        self.bodies.len()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        self.bodies.iter().any(|b| b.contains(x))
    }

    pub fn extent(&self) -> (Vec<T>, Vec<T>) {
        let (mut lo, mut hi) = self.bodies[0].extent();
        for b in &self.bodies[1..] {
            let (l, h) = b.extent();
            for i in 0..lo.len() {
                lo[i] = lo[i].min(l[i]);
                hi[i] = hi[i].max(h[i]);
            }
        }
        (lo, hi)
    }

    /// Smallest `c` with the set inside `[-c, c]^d`.
    pub fn bound_constant(&self) -> T {
        let (lo, hi) = self.extent();
        lo.iter()
            .chain(hi.iter())
            .fold(T::zero(), |acc, x| acc.max(x.abs()))
    }

    pub fn scaled(&self, s: &[T]) -> PConvexSet<T> {
        PConvexSet {
            bodies: self.bodies.iter().map(|b| b.scaled(s)).collect(),
        }
    }

    pub fn all_boxes(&self) -> bool {
        self.bodies.iter().all(|b| matches!(b, ConvexBody::Box { .. }))
    }

    /// Whether the half-open box `[lo, hi)` meets the set.
    pub fn meets_half_open_box(&self, lo: &[T], hi: &[T]) -> bool {
        self.bodies.iter().any(|b| b.meets_half_open_box(lo, hi))
    }

    /// Whether the closed box `[lo, hi]` is covered by the union.
    ///
    /// Exact for a single body and for unions of boxes. Other unions are
    /// resolved by bisection down to a fixed depth; sub-boxes still straddling
    /// several bodies at that depth count as uncovered.
    pub fn contains_closed_box(&self, lo: &[T], hi: &[T]) -> bool {
        if self.bodies.iter().any(|b| b.contains_closed_box(lo, hi)) {
            return true;
        }
        if self.bodies.len() == 1 {
            return false;
        }
        if self.all_boxes() {
            return box_union_covers(&self.bodies, lo, hi);
        }
        self.bisect_covers(lo, hi, BISECTION_DEPTH)
    }

    fn bisect_covers(&self, lo: &[T], hi: &[T], depth: u32) -> bool {
        if self.bodies.iter().any(|b| b.contains_closed_box(lo, hi)) {
            return true;
        }
        let center: Vec<T> = lo.iter().zip(hi).map(|(a, b)| (*a + *b) / T::lit(2.0)).collect();
        if depth == 0 || !self.contains(&center) {
            return false;
        }
        let d = lo.len();
        (0..1usize << d).all(|mask| {
            let (sl, sh): (Vec<T>, Vec<T>) = (0..d)
                .map(|l| {
                    if mask >> l & 1 == 0 {
                        (lo[l], center[l])
                    } else {
                        (center[l], hi[l])
                    }
                })
                .unzip();
            self.bisect_covers(&sl, &sh, depth - 1)
        })
    }

    /// Lebesgue measure of the union.
    ///
    /// Exact for a single body, for unions of boxes, and for bodies whose
    /// bounding boxes have pairwise disjoint interiors. Other unions use the
    /// midpoint rule on a regular grid over the bounding box with `2^10`
    /// cells per axis (`2^7` when `d ≥ 3`); the error is at most the volume of
    /// the grid cells meeting the boundary.
    pub fn volume(&self) -> T {
        if self.bodies.len() == 1 {
            return self.bodies[0].volume();
        }
        if self.all_boxes() {
            return box_union_volume(&self.bodies);
        }
        if self.bounding_boxes_disjoint() {
            return self.bodies.iter().fold(T::zero(), |acc, b| acc + b.volume());
        }
        self.quadrature_volume()
    }

    fn bounding_boxes_disjoint(&self) -> bool {
        let ext: Vec<_> = self.bodies.iter().map(|b| b.extent()).collect();
        for i in 0..ext.len() {
            for j in i + 1..ext.len() {
                let overlap = (0..self.dim()).all(|l| ext[i].0[l] < ext[j].1[l] && ext[j].0[l] < ext[i].1[l]);
                if overlap {
                    return false;
                }
            }
        }
        true
    }

    fn quadrature_volume(&self) -> T {
        let d = self.dim();
        let level = if d >= 3 { QUADRATURE_LEVEL_HIGH_DIM } else { QUADRATURE_LEVEL };
        let cells = 1usize << level;
        let (lo, hi) = self.extent();
        let h: Vec<T> = lo
            .iter()
            .zip(&hi)
            .map(|(l, u)| (*u - *l) / T::from_usize(cells).unwrap())
            .collect();
        let cell_vol = h.iter().fold(T::one(), |acc, x| acc * *x);
        let total = cells.pow(d as u32);
        let mut x = vec![T::zero(); d];
        let mut inside = 0usize;
        for idx in 0..total {
            let mut r = idx;
            for l in 0..d {
                let i = r % cells;
                r /= cells;
                x[l] = lo[l] + h[l] * (T::from_usize(i).unwrap() + T::lit(0.5));
            }
            if self.contains(&x) {
                inside += 1;
            }
        }
        cell_vol * T::from_usize(inside).unwrap()
    }
}

/// Exact volume of a union of boxes by coordinate compression.
fn box_union_volume<T: Scalar>(boxes: &[ConvexBody<T>]) -> T {
    let d = boxes[0].dim();
    let mut cuts: Vec<Vec<T>> = vec![Vec::new(); d];
    for b in boxes {
        let (lo, hi) = b.extent();
        for l in 0..d {
            cuts[l].push(lo[l]);
            cuts[l].push(hi[l]);
        }
    }
    for c in cuts.iter_mut() {
        c.sort_by(|a, b| a.partial_cmp(b).unwrap());
        c.dedup();
    }
    let counts: Vec<usize> = cuts.iter().map(|c| c.len() - 1).collect();
    let total: usize = counts.iter().product();
    let mut vol = T::zero();
    let mut mid = vec![T::zero(); d];
    for idx in 0..total {
        let mut r = idx;
        let mut cell = T::one();
        for l in 0..d {
            let i = r % counts[l];
            r /= counts[l];
            mid[l] = (cuts[l][i] + cuts[l][i + 1]) / T::lit(2.0);
            cell = cell * (cuts[l][i + 1] - cuts[l][i]);
        }
        if boxes.iter().any(|b| b.contains(&mid)) {
            vol = vol + cell;
        }
    }
    vol
}

#[derive(Clone)]
struct Interval<T> {
    lo: T,
    lo_closed: bool,
    hi: T,
    hi_closed: bool,
}

impl<T: Scalar> Interval<T> {
    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }
}

/// Whether closed boxes cover the closed query box, by repeated subtraction
/// with open/closed endpoint bookkeeping.
fn box_union_covers<T: Scalar>(boxes: &[ConvexBody<T>], lo: &[T], hi: &[T]) -> bool {
    let d = lo.len();
    let mut pieces: Vec<Vec<Interval<T>>> = vec![(0..d)
        .map(|l| Interval {
            lo: lo[l],
            lo_closed: true,
            hi: hi[l],
            hi_closed: true,
        })
        .collect()];
    for b in boxes {
        let (bl, bh) = b.extent();
        let mut next = Vec::new();
        for piece in pieces {
            let mut rest = piece.clone();
            for l in 0..d {
                let below = Interval {
                    lo: rest[l].lo,
                    lo_closed: rest[l].lo_closed,
                    hi: rest[l].hi.min(bl[l]),
                    hi_closed: if bl[l] <= rest[l].hi { false } else { rest[l].hi_closed },
                };
                let above = Interval {
                    lo: rest[l].lo.max(bh[l]),
                    lo_closed: if bh[l] >= rest[l].lo { false } else { rest[l].lo_closed },
                    hi: rest[l].hi,
                    hi_closed: rest[l].hi_closed,
                };
                for part in [below, above] {
                    if !part.is_empty() {
                        let mut p = rest.clone();
                        p[l] = part;
                        next.push(p);
                    }
                }
                let mid = Interval {
                    lo: rest[l].lo.max(bl[l]),
                    lo_closed: if bl[l] > rest[l].lo { true } else { rest[l].lo_closed },
                    hi: rest[l].hi.min(bh[l]),
                    hi_closed: if bh[l] < rest[l].hi { true } else { rest[l].hi_closed },
                };
                if mid.is_empty() {
                    break;
                }
                rest[l] = mid;
            }
        }
        pieces = next;
        if pieces.is_empty() {
            return true;
        }
    }
    pieces.is_empty()
}

/// Per-axis expansion rates `c_n = (c_{n,1}, …, c_{n,d})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<T>", into = "Vec<T>", bound = "T: Scalar")]
pub struct ScalingVector<T>(Vec<T>);

impl<T: Scalar> TryFrom<Vec<T>> for ScalingVector<T> {
    type Error = Error;

    fn try_from(entries: Vec<T>) -> Result<Self> {
        Self::new(entries)
    }
}

impl<T> From<ScalingVector<T>> for Vec<T> {
    fn from(s: ScalingVector<T>) -> Self {
        s.0
    }
}

impl<T: Scalar> ScalingVector<T> {
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.is_empty() || entries.iter().any(|c| !(*c > T::zero()) || !c.is_finite()) {
            return Err(Error::InvalidGeometry("scaling vector entries must be positive".into()));
        }
        Ok(Self(entries))
    }

    pub fn isotropic(c: T, dim: usize) -> Result<Self> {
        Self::new(vec![c; dim])
    }

    pub fn entries(&self) -> &[T] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn product(&self) -> T {
        self.0.iter().fold(T::one(), |acc, c| acc * *c)
    }

    /// `v / c_n` for a lattice point.
    pub fn rescale(&self, v: &[i64]) -> Vec<T> {
        v.iter().zip(&self.0).map(|(x, c)| T::from_i64_exact(*x) / *c).collect()
    }

    pub(crate) fn rescale_into(&self, v: &[i64], out: &mut [T]) {
        for ((o, x), c) in out.iter_mut().zip(v).zip(&self.0) {
            *o = T::from_i64_exact(*x) / *c;
        }
    }
}
