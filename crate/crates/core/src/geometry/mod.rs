//! Convex bodies, the scaled lattice regions `D_n = (c_n C) ∩ Z^d`, their
//! block partitions and assumption diagnostics.

mod body;
mod partition;
mod region;
mod report;
mod schedule;
mod set;

pub use body::{intrinsic_volumes, unit_ball_volume, ConvexBody};
pub use partition::{block_side, default_block_count, separated_core, BlockPartition, DependenceSpec};
pub use region::{LatticePoints, LatticeRegion};
pub use report::{assumption_report, AssumptionReport, AssumptionRow, GROWTH_TOLERANCE};
pub use schedule::{GeometryRow, GeometrySpec, ScheduleStep, GEOMETRY_VERSION};
pub use set::{PConvexSet, ScalingVector, QUADRATURE_LEVEL};
