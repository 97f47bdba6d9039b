//! Marginal laws, i.i.d. and moving-maximum fields, and exact oracles.
//!
//! Driving noise is counter based: the uniform behind `Y_z` is a hash of
//! `(seed, replication, z)`, so overlapping windows `v + B` read the same
//! `Y_z` and any subset of the lattice can be simulated independently.

mod marginal;
mod model;
mod noise;

pub use marginal::{threshold, MarginalDistribution, ThresholdSchedule};
pub use model::{simulate, simulate_box, FieldModel, FieldSample};
pub use noise::{stream_seed, NoiseKey, Stream};
