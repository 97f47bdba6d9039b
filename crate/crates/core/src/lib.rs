//! Extremal clusters of stationary random fields observed on lattice
//! approximations of p-convex sets.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`] integer boxes, sorted point sets, the lexicographic order and
//!   order-successor neighbourhoods;
//! * [`geometry`] convex bodies, the scaled index sets `D_n = (c_n C) ∩ Z^d`,
//!   block partitions and assumption diagnostics;
//! * [`fields`] marginal laws, i.i.d. and moving-maximum fields with
//!   coordinate-keyed noise, exact oracles;
//! * [`clustering`] grid, distance and exceedance cluster measures;
//! * [`analysis`] the Monte Carlo harness, estimators and Poisson
//!   goodness-of-fit.
//!
//! Geometry, fields and clustering are generic over [`Scalar`] (`f32` or
//! `f64`). The aliases below pin the common `f64` instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod clustering;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod lattice;
mod scalar;

pub use error::{Error, Result};
pub use lattice::{LatticeBox, OrderSpec, Point, PointSet};
pub use scalar::Scalar;

pub type ConvexBodyF64 = geometry::ConvexBody<f64>;
pub type PConvexSetF64 = geometry::PConvexSet<f64>;
pub type ScalingVectorF64 = geometry::ScalingVector<f64>;
pub type LatticeRegionF64 = geometry::LatticeRegion<f64>;
pub type MarginalF64 = fields::MarginalDistribution<f64>;
pub type FieldModelF64 = fields::FieldModel<f64>;
pub type FieldSampleF64 = fields::FieldSample<f64>;
pub type ClusterMeasureF64 = clustering::ClusterMeasure<f64>;
pub type ExperimentConfigF64 = analysis::ExperimentConfig<f64>;

pub type ConvexBodyF32 = geometry::ConvexBody<f32>;
pub type PConvexSetF32 = geometry::PConvexSet<f32>;
pub type LatticeRegionF32 = geometry::LatticeRegion<f32>;
pub type FieldModelF32 = fields::FieldModel<f32>;
pub type FieldSampleF32 = fields::FieldSample<f32>;
pub type ClusterMeasureF32 = clustering::ClusterMeasure<f32>;
