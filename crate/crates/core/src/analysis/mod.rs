//! Monte Carlo harness: replications, estimators, representation checks and
//! Poisson goodness of fit.

mod config;
mod estimators;
mod run;
mod stats;
mod summary;

pub use config::{Check, EstimatorConfig, ExperimentConfig, NamedQuery, CONFIG_VERSION};
pub use estimators::{
    anti_clustering_diagnostic, count_column, estimate_local_index, estimate_max_cdf, estimate_theta_runs,
    exceedance_count_cdf, grid_distance_disagreement, mean_cluster_size, order_statistic_cdf, poisson_cdf,
    pooled_cluster_size, representation_check, AntiClustering, RepresentationReport, SizeCondition,
};
pub use run::{
    neighborhood_tally, run_experiment, ExperimentSetup, FamilyCounts, KindCounts, ReplicationRow, ReplicationTable,
    Tally,
};
pub use stats::{
    independence_check, mean_estimate, poisson_gof, proportion, ratio_estimate, Estimate, GofReport,
    IndependenceReport, MIN_EXPECTED, POISSON_TAIL,
};
pub use summary::{evaluate_checks, summarize, CheckOutcome, Summary, ToleranceProfile};
