use super::set::{PConvexSet, ScalingVector};
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, PointSet};
use crate::Scalar;

/// `D_n = (c_n C) ∩ Z^d` together with its bounding lattice box
/// `K_n = Z^d ∩ c_n[-c, c]^d`.
#[derive(Debug, Clone)]
pub struct LatticeRegion<T> {
    generator: PConvexSet<T>,
    scale: ScalingVector<T>,
    points: PointSet,
    bound: T,
    enclosing: LatticeBox,
}

/// Result of enumerating a region. `empty_warning` is set when the scaled set
/// contains no lattice point at all.
#[derive(Debug, Clone)]
pub struct LatticePoints<'a> {
    pub points: &'a PointSet,
    pub empty_warning: bool,
}

impl<T: Scalar> LatticeRegion<T> {
    pub fn new(generator: PConvexSet<T>, scale: ScalingVector<T>) -> Result<Self> {
        generator.validate()?;
        if scale.dim() != generator.dim() {
            return Err(Error::DimensionMismatch {
                expected: generator.dim(),
                got: scale.dim(),
            });
        }
        let d = generator.dim();
        let bound = generator.bound_constant();
        let enclosing = LatticeBox::new(
            (0..d)
                .map(|l| (-bound * scale.entries()[l]).ceil().to_i64().unwrap())
                .collect(),
            (0..d)
                .map(|l| (bound * scale.entries()[l]).floor().to_i64().unwrap())
                .collect(),
        );
        let points = scan(&generator, &scale);
        Ok(Self {
            generator,
            scale,
            points,
            bound,
            enclosing,
        })
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    pub fn generator(&self) -> &PConvexSet<T> {
        &self.generator
    }

    pub fn scale(&self) -> &ScalingVector<T> {
        &self.scale
    }

    /// `|D_n|`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn lattice_points(&self) -> LatticePoints<'_> {
        LatticePoints {
            points: &self.points,
            empty_warning: self.points.is_empty(),
        }
    }

    /// The constant `c` of `K_n`.
    pub fn bound_constant(&self) -> T {
        self.bound
    }

    /// `K_n`.
    pub fn enclosing_box(&self) -> &LatticeBox {
        &self.enclosing
    }

    /// Continuous membership `v / c_n ∈ C`.
    pub fn contains(&self, v: &[i64]) -> bool {
        self.generator.contains(&self.scale.rescale(v))
    }

    /// `|C_n| = |C| ∏ c_ℓ`.
    pub fn set_volume(&self) -> T {
        self.generator.volume() * self.scale.product()
    }
}

/// Scans the integer hull of `c_n · extent(C)`, widened by one cell per side
/// against rounding, with the rescaled membership test.
fn scan<T: Scalar>(generator: &PConvexSet<T>, scale: &ScalingVector<T>) -> PointSet {
    let d = generator.dim();
    let (lo, hi) = generator.extent();
    let c = scale.entries();
    let hull = LatticeBox::new(
        (0..d).map(|l| (lo[l] * c[l]).floor().to_i64().unwrap() - 1).collect(),
        (0..d).map(|l| (hi[l] * c[l]).ceil().to_i64().unwrap() + 1).collect(),
    );
    let mut x = vec![T::zero(); d];
    let mut coords = Vec::new();
    for v in hull.iter() {
        scale.rescale_into(&v, &mut x);
        if generator.contains(&x) {
            coords.extend_from_slice(&v);
        }
    }
    PointSet::from_sorted_unchecked(d, coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexBody;

    fn square_region(c: f64) -> LatticeRegion<f64> {
        LatticeRegion::new(
            PConvexSet::single(ConvexBody::unit_cube(2)).unwrap(),
            ScalingVector::isotropic(c, 2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn unit_square_counts() {
        let r = square_region(10.0);
        assert_eq!(r.len(), 121);
        assert_eq!(r.points().get(0), &[0, 0]);
        assert_eq!(r.points().get(120), &[10, 10]);
        assert_eq!(square_region(1.0).len(), 4);
    }

    #[test]
    fn enumeration_is_inside_enclosing_box() {
        let r = LatticeRegion::new(
            PConvexSet::single(ConvexBody::Ball {
                center: vec![0.2, -0.1],
                radius: 0.4,
            })
            .unwrap(),
            ScalingVector::new(vec![37.0, 12.5]).unwrap(),
        )
        .unwrap();
        assert!(r.points().iter().all(|v| r.enclosing_box().contains(v) && r.contains(v)));
        assert!(!r.lattice_points().empty_warning);
    }

    #[test]
    fn tiny_region_warns_empty() {
        let r = LatticeRegion::new(
            PConvexSet::single(ConvexBody::Box {
                lower: vec![0.3, 0.3],
                upper: vec![0.4, 0.4],
            })
            .unwrap(),
            ScalingVector::isotropic(2.0, 2).unwrap(),
        )
        .unwrap();
        assert!(r.lattice_points().empty_warning);
        assert_eq!(r.len(), 0);
    }

    #[test]
    fn f32_region_agrees_on_exact_geometry() {
        let r32 = LatticeRegion::<f32>::new(
            PConvexSet::single(ConvexBody::unit_cube(2)).unwrap(),
            ScalingVector::isotropic(150.0, 2).unwrap(),
        )
        .unwrap();
        assert_eq!(r32.len(), square_region(150.0).len());
    }
}
