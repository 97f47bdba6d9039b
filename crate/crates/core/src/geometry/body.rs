use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// Compact convex body with non-empty interior. All kinds are axis-aligned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[serde(bound = "T: Scalar")]
pub enum ConvexBody<T> {
    Box { lower: Vec<T>, upper: Vec<T> },
    Ball { center: Vec<T>, radius: T },
    Ellipsoid { center: Vec<T>, semi_axes: Vec<T> },
}

impl<T: Scalar> ConvexBody<T> {
    pub fn unit_cube(dim: usize) -> Self {
        ConvexBody::Box {
            lower: vec![T::zero(); dim],
            upper: vec![T::one(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Box { lower, .. } => lower.len(),
            ConvexBody::Ball { center, .. } | ConvexBody::Ellipsoid { center, .. } => center.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[T]| v.iter().all(|x| x.is_finite());
        match self {
            ConvexBody::Box { lower, upper } => {
                if lower.is_empty() || lower.len() != upper.len() {
                    return Err(Error::InvalidGeometry("box corners must share a positive dimension".into()));
                }
                if !finite(lower) || !finite(upper) || lower.iter().zip(upper).any(|(l, u)| !(l < u)) {
                    return Err(Error::InvalidGeometry("box requires lower < upper coordinate-wise".into()));
                }
            }
            ConvexBody::Ball { center, radius } => {
                if center.is_empty() || !finite(center) {
                    return Err(Error::InvalidGeometry("ball center must be a finite vector".into()));
                }
                if !(*radius > T::zero()) || !radius.is_finite() {
                    return Err(Error::InvalidGeometry("ball radius must be positive".into()));
                }
            }
            ConvexBody::Ellipsoid { center, semi_axes } => {
                if center.is_empty() || center.len() != semi_axes.len() || !finite(center) {
                    return Err(Error::InvalidGeometry("ellipsoid center and axes must share a dimension".into()));
                }
                if semi_axes.iter().any(|a| !(*a > T::zero()) || !a.is_finite()) {
                    return Err(Error::InvalidGeometry("ellipsoid semi-axes must be positive".into()));
                }
            }
        }
        Ok(())
    }

    fn center_and_axes(&self) -> Option<(&[T], Vec<T>)> {
        match self {
            ConvexBody::Box { .. } => None,
            ConvexBody::Ball { center, radius } => Some((center, vec![*radius; center.len()])),
            ConvexBody::Ellipsoid { center, semi_axes } => Some((center, semi_axes.clone())),
        }
    }

    /// Closed membership test.
    pub fn contains(&self, x: &[T]) -> bool {
        match self {
            ConvexBody::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| l <= v && v <= u),
            ConvexBody::Ball { center, radius } => {
                let r2 = *radius * *radius;
                let d2 = x
                    .iter()
                    .zip(center)
                    .fold(T::zero(), |acc, (v, c)| acc + (*v - *c) * (*v - *c));
                d2 <= r2
            }
            ConvexBody::Ellipsoid { center, semi_axes } => {
                let q = x
                    .iter()
                    .zip(center.iter().zip(semi_axes))
                    .fold(T::zero(), |acc, (v, (c, a))| {
                        let s = (*v - *c) / *a;
                        acc + s * s
                    });
                q <= T::one()
            }
        }
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn extent(&self) -> (Vec<T>, Vec<T>) {
        match self {
            ConvexBody::Box { lower, upper } => (lower.clone(), upper.clone()),
            _ => {
                let (c, a) = self.center_and_axes().unwrap();
                (
                    c.iter().zip(&a).map(|(c, a)| *c - *a).collect(),
                    c.iter().zip(&a).map(|(c, a)| *c + *a).collect(),
                )
            }
        }
    }

    /// Whether the closed box `[lo, hi]` lies inside the body.
    ///
    /// For the rounded kinds the farthest point of the box from the centre is
    /// tested, which is the box corner maximising each normalised coordinate.
    pub fn contains_closed_box(&self, lo: &[T], hi: &[T]) -> bool {
        match self {
            ConvexBody::Box { lower, upper } => (0..lo.len()).all(|l| lower[l] <= lo[l] && hi[l] <= upper[l]),
            _ => {
                let (c, a) = self.center_and_axes().unwrap();
                let q = (0..lo.len()).fold(T::zero(), |acc, l| {
                    let s = ((lo[l] - c[l]) / a[l]).abs().max(((hi[l] - c[l]) / a[l]).abs());
                    acc + s * s
                });
                q <= T::one()
            }
        }
    }

    /// Whether the half-open box `[lo, hi)` meets the (closed) body.
    pub fn meets_half_open_box(&self, lo: &[T], hi: &[T]) -> bool {
        match self {
            ConvexBody::Box { lower, upper } => (0..lo.len()).all(|l| lo[l] <= upper[l] && lower[l] < hi[l]),
            _ => {
                let (c, a) = self.center_and_axes().unwrap();
                let nearest: Vec<T> = (0..lo.len()).map(|l| c[l].max(lo[l]).min(hi[l])).collect();
                let q = (0..lo.len()).fold(T::zero(), |acc, l| {
                    let s = (nearest[l] - c[l]) / a[l];
                    acc + s * s
                });
                if q < T::one() {
                    true
                } else if q > T::one() {
                    false
                } else {
                    // tangent: the single common point must avoid the open faces
                    (0..lo.len()).all(|l| nearest[l] < hi[l])
                }
            }
        }
    }

    /// Image under the coordinate-wise map `x ↦ s x` (s > 0). A ball scaled
    /// anisotropically becomes an ellipsoid.
    pub fn scaled(&self, s: &[T]) -> ConvexBody<T> {
        let mul = |v: &[T]| v.iter().zip(s).map(|(a, b)| *a * *b).collect::<Vec<T>>();
        match self {
            ConvexBody::Box { lower, upper } => ConvexBody::Box {
                lower: mul(lower),
                upper: mul(upper),
            },
            ConvexBody::Ball { center, radius } => {
                if s.iter().all(|x| *x == s[0]) {
                    ConvexBody::Ball {
                        center: mul(center),
                        radius: *radius * s[0],
                    }
                } else {
                    ConvexBody::Ellipsoid {
                        center: mul(center),
                        semi_axes: s.iter().map(|x| *x * *radius).collect(),
                    }
                }
            }
            ConvexBody::Ellipsoid { center, semi_axes } => ConvexBody::Ellipsoid {
                center: mul(center),
                semi_axes: mul(semi_axes),
            },
        }
    }

    pub fn volume(&self) -> T {
        let d = self.dim();
        match self {
            ConvexBody::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .fold(T::one(), |acc, (l, u)| acc * (*u - *l)),
            ConvexBody::Ball { radius, .. } => T::lit(unit_ball_volume(d)) * radius.powi(d as i32),
            ConvexBody::Ellipsoid { semi_axes, .. } => {
                semi_axes.iter().fold(T::lit(unit_ball_volume(d)), |acc, a| acc * *a)
            }
        }
    }
}

/// `ω_j`, the volume of the unit ball in `R^j`.
pub fn unit_ball_volume(j: usize) -> f64 {
    // ω_0 = 1, ω_1 = 2, ω_j = ω_{j-2} · 2π / j
    let mut even = 1.0;
    let mut odd = 2.0;
    if j == 0 {
        return even;
    }
    if j == 1 {
        return odd;
    }
    for k in 2..=j {
        if k % 2 == 0 {
            even *= 2.0 * std::f64::consts::PI / k as f64;
        } else {
            odd *= 2.0 * std::f64::consts::PI / k as f64;
        }
    }
    if j.is_multiple_of(2) {
        even
    } else {
        odd
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Intrinsic volumes `(V_0, …, V_d)` of a box or ball.
///
/// Boxes: `V_j` is the j-th elementary symmetric polynomial of the side
/// lengths. Balls: `V_j = C(d, j) ω_d / ω_{d-j} r^j`. Ellipsoids are not
/// supported.
pub fn intrinsic_volumes<T: Scalar>(body: &ConvexBody<T>) -> Result<Vec<T>> {
    let d = body.dim();
    match body {
        ConvexBody::Box { lower, upper } => {
            // e_0..e_d by the usual product expansion
            let mut e = vec![T::zero(); d + 1];
            e[0] = T::one();
            for (l, u) in lower.iter().zip(upper) {
                let a = *u - *l;
                for j in (1..=d).rev() {
                    e[j] = e[j] + e[j - 1] * a;
                }
            }
            Ok(e)
        }
        ConvexBody::Ball { radius, .. } => Ok((0..=d)
            .map(|j| {
                let coef = binomial(d, j) * unit_ball_volume(d) / unit_ball_volume(d - j);
                T::lit(coef) * radius.powi(j as i32)
            })
            .collect()),
        ConvexBody::Ellipsoid { .. } => Err(Error::UnsupportedBody(
            "intrinsic volumes of ellipsoids have no closed form",
        )),
    }
}
