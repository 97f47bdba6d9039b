//! Grid, distance and exceedance cluster measures and their counts on
//! half-open box regions and on original-scale subset families.

mod family;
mod measure;
mod query;
mod union_find;

pub use family::{RealizedFamily, SubsetFamily, SubsetSpec};
pub use measure::{
    block_exceedances, central_member, chain_components, distance_clusters, exceedance_clusters,
    exceedance_lattice_points, exceedance_points, grid_clusters, rescaled_distance_sq, Cluster, ClusterKind,
    ClusterMeasure, ClusterMetadata,
};
pub use query::{HalfOpenBox, RegionQuery};
pub use union_find::UnionFind;

pub(crate) use measure::{distance_from_blocks, exceedance_from_points, grid_from_blocks};
