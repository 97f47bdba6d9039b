use serde::Serialize;

use super::run::{KindCounts, ReplicationTable, Tally};
use super::stats::{mean_estimate, proportion, ratio_estimate, Estimate};
use crate::clustering::ClusterKind;
use crate::error::{Error, Result};

fn pick(c: &KindCounts, kind: ClusterKind) -> usize {
    match kind {
        ClusterKind::Grid => c.grid,
        ClusterKind::Distance => c.distance,
        ClusterKind::Exceedance => c.exceedance,
    }
}

/// Per-replication totals over `C` (`query = None`) or over a named query.
pub fn count_column(table: &ReplicationTable, kind: ClusterKind, query: Option<usize>) -> Vec<usize> {
    table
        .rows
        .iter()
        .map(|r| pick(query.map_or(&r.totals, |q| &r.queries[q]), kind))
        .collect()
}

/// `P̂(M_ξ(D_n) ≤ x)`.
pub fn estimate_max_cdf(table: &ReplicationTable, x: f64) -> Result<Estimate> {
    proportion(table.rows.iter().filter(|r| r.max <= x).count(), table.len())
}

fn pooled_tally(tallies: impl Iterator<Item = Tally>) -> Result<Estimate> {
    let pairs: Vec<(f64, f64)> = tallies
        .map(|t| (t.successes as f64, t.exceedances as f64))
        .collect();
    ratio_estimate(&pairs).map_err(|_| Error::UndefinedEstimate("no exceedances in any replication".into()))
}

/// Pooled runs estimator `θ̂ = #{ξ_v > x, M_ξ(A_v^{(m)}) ≤ x} / #{ξ_v > x}`.
pub fn estimate_theta_runs(table: &ReplicationTable, m: u32) -> Result<Estimate> {
    let i = table
        .runs_m
        .iter()
        .position(|x| *x == m)
        .ok_or_else(|| Error::InvalidArgument(format!("runs estimator for m = {m} was not recorded")))?;
    pooled_tally(table.rows.iter().map(|r| r.runs[i]))
}

/// The same ratio with the block neighbourhood `A_v^{n,k}`.
pub fn estimate_local_index(table: &ReplicationTable) -> Result<Estimate> {
    pooled_tally(table.rows.iter().map(|r| r.local))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AntiClustering {
    /// Estimate of `|D_n| P(M_ξ(A_0^{(m)}) ≤ x < ξ_0, M_ξ(A_0^{n,k} ∖ A_0^{(m)}) > x)`.
    pub estimate: Estimate,
    pub no_events: bool,
}

pub fn anti_clustering_diagnostic(table: &ReplicationTable, m: u32) -> Result<AntiClustering> {
    let i = table
        .anti_m
        .iter()
        .position(|x| *x == m)
        .ok_or_else(|| Error::InvalidArgument(format!("anti-clustering for m = {m} was not recorded")))?;
    let xs: Vec<f64> = table.rows.iter().map(|r| r.anti[i] as f64).collect();
    let estimate = mean_estimate(&xs)?;
    Ok(AntiClustering {
        estimate,
        no_events: estimate.value == 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepresentationReport {
    /// `P̂(M_ξ(D_n) ≤ x_n)`.
    pub lhs: Estimate,
    /// `exp(-|D_n| P̂(M_ξ(A_0^{n,k}) ≤ x_n < ξ_0))`.
    pub rhs: Estimate,
    pub difference: f64,
}

pub fn representation_check(table: &ReplicationTable) -> Result<RepresentationReport> {
    let lhs = estimate_max_cdf(table, table.threshold)?;
    let hazard: Vec<f64> = table.rows.iter().map(|r| r.local.successes as f64).collect();
    let h = mean_estimate(&hazard)?;
    let rhs = (-h.value).exp();
    Ok(RepresentationReport {
        lhs,
        rhs: Estimate {
            value: rhs,
            se: rhs * h.se,
        },
        difference: lhs.value - rhs,
    })
}

/// Which replications enter a mean cluster size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeCondition {
    /// All replications with at least one cluster.
    Positive,
    /// Replications whose total count over `C` equals `ℓ`.
    Total(usize),
}

impl SizeCondition {
    fn admits(self, total: usize) -> bool {
        match self {
            Self::Positive => total > 0,
            Self::Total(l) => total == l,
        }
    }
}

/// Mean cluster size. Grid clusters are pooled over all counted blocks
/// (`E(Y | Y > 0)`); distance clusters use one uniformly drawn cluster per
/// qualifying replication.
pub fn mean_cluster_size(table: &ReplicationTable, kind: ClusterKind, condition: SizeCondition) -> Result<Estimate> {
    let rows = table
        .rows
        .iter()
        .filter(|r| condition.admits(pick(&r.totals, kind)));
    let undefined = || Error::UndefinedEstimate("no replication satisfies the size condition".into());
    match kind {
        ClusterKind::Distance => {
            let drawn: Vec<f64> = rows.filter_map(|r| r.drawn_size).map(|s| s as f64).collect();
            mean_estimate(&drawn).map_err(|_| undefined())
        }
        ClusterKind::Grid | ClusterKind::Exceedance => {
            let pairs: Vec<(f64, f64)> = rows
                .map(|r| match kind {
                    ClusterKind::Grid => (r.grid_sizes.iter().sum::<usize>() as f64, r.grid_sizes.len() as f64),
                    _ => (r.totals.exceedance as f64, r.totals.exceedance as f64),
                })
                .collect();
            ratio_estimate(&pairs).map_err(|_| undefined())
        }
    }
}

/// Mean size over all clusters of all replications.
pub fn pooled_cluster_size(table: &ReplicationTable, kind: ClusterKind) -> Result<Estimate> {
    let pairs: Vec<(f64, f64)> = table
        .rows
        .iter()
        .map(|r| {
            let sizes: &[usize] = match kind {
                ClusterKind::Grid => &r.grid_sizes,
                ClusterKind::Distance => &r.distance_sizes,
                ClusterKind::Exceedance => return (r.totals.exceedance as f64, r.totals.exceedance as f64),
            };
            (sizes.iter().sum::<usize>() as f64, sizes.len() as f64)
        })
        .collect();
    ratio_estimate(&pairs)
}

/// `P̂(ξ_(k) ≤ x)` over `D_n`.
pub fn order_statistic_cdf(table: &ReplicationTable, k: usize, x: f64) -> Result<Estimate> {
    if k == 0 || k > table.region_size {
        return Err(Error::InvalidArgument(format!("rank {k} outside 1..={}", table.region_size)));
    }
    let mut hits = 0;
    for r in &table.rows {
        let xk = *r
            .top
            .get(k - 1)
            .ok_or_else(|| Error::InvalidArgument(format!("order statistic {k} was not recorded")))?;
        if xk <= x {
            hits += 1;
        }
    }
    proportion(hits, table.len())
}

/// `P̂(N̄_n(C) ≤ k - 1)`.
pub fn exceedance_count_cdf(table: &ReplicationTable, k: usize) -> Result<Estimate> {
    proportion(
        table.rows.iter().filter(|r| r.totals.exceedance < k).count(),
        table.len(),
    )
}

/// `P̂(N_n(C) ≠ Ñ_n(C))`.
pub fn grid_distance_disagreement(table: &ReplicationTable) -> Result<Estimate> {
    proportion(
        table.rows.iter().filter(|r| r.totals.grid != r.totals.distance).count(),
        table.len(),
    )
}

/// `e^{-λ} Σ_{j<k} λ^j / j!`.
pub fn poisson_cdf(lambda: f64, k: usize) -> f64 {
    let mut term = (-lambda).exp();
    let mut sum = 0.0;
    for j in 0..k {
        sum += term;
        term *= lambda / (j + 1) as f64;
    }
    sum
}
