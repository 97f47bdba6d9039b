use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::clustering::{
    distance_from_blocks, exceedance_from_points, grid_from_blocks, ClusterMeasure, RealizedFamily,
};
use crate::error::{Error, Result};
use crate::fields::{simulate_box, stream_seed, threshold, FieldSample, Stream, ThresholdSchedule};
use crate::geometry::{default_block_count, BlockPartition, DependenceSpec, LatticeRegion};
use crate::lattice::{LatticeBox, NeighborhoodMode, OrderNeighborhood, OrderSpec, Point, PointSet};
use crate::Scalar;

/// Exceedances `ξ_v > x` at sites `v` and how many of them have no further
/// exceedance in their order-successor neighbourhood.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub exceedances: usize,
    pub successes: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounts {
    pub grid: usize,
    pub distance: usize,
    pub exceedance: usize,
}

/// Original-scale counts `L`, `L̃`, `L̄` per family member.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCounts {
    pub grid: Vec<usize>,
    pub distance: Vec<usize>,
    pub exceedance: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub replication: u64,
    /// `M_ξ(D_n)`.
    pub max: f64,
    /// Largest values over `D_n` in decreasing order, `ξ_(1), ξ_(2), …`.
    pub top: Vec<f64>,
    /// `N_n(C)`, `Ñ_n(C)`, `N̄_n(C)`.
    pub totals: KindCounts,
    /// Counts per configured query.
    pub queries: Vec<KindCounts>,
    /// `Y_z` of the counted blocks.
    pub grid_sizes: Vec<usize>,
    pub distance_sizes: Vec<usize>,
    /// Size of one uniformly drawn distance cluster.
    pub drawn_size: Option<usize>,
    /// Runs-estimator tallies, one per configured `m`.
    pub runs: Vec<Tally>,
    /// Tally with the block neighbourhood `A_v^{n,k}`.
    pub local: Tally,
    /// Anti-clustering event counts, one per configured `m`.
    pub anti: Vec<usize>,
    pub family: Option<FamilyCounts>,
}

/// Per-replication statistics plus the fixed experiment constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationTable {
    pub rows: Vec<ReplicationRow>,
    pub threshold: f64,
    pub region_size: usize,
    pub tau: f64,
    pub theta: f64,
    pub exact_max_cdf: f64,
    pub k: u64,
    pub t: Vec<i64>,
    pub p: usize,
    pub q: usize,
    pub q_minus: usize,
    pub query_names: Vec<String>,
    pub runs_m: Vec<u32>,
    pub anti_m: Vec<u32>,
    pub family_fractions: Option<Vec<f64>>,
    pub realized_fractions: Option<Vec<f64>>,
}

impl ReplicationTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Whether some later exceedance `exc[j]`, `j > i`, has offset accepted by
/// `accept`. `exc` is lexicographically sorted, so the scan stops once the
/// first coordinate is out of `reach`.
fn any_successor(exc: &[Point], i: usize, reach: i64, mut accept: impl FnMut(&[i64]) -> bool) -> bool {
    let v = &exc[i];
    let mut off = vec![0; v.len()];
    for w in &exc[i + 1..] {
        if w[0] - v[0] > reach {
            break;
        }
        for l in 0..v.len() {
            off[l] = w[l] - v[l];
        }
        if accept(&off) {
            return true;
        }
    }
    false
}

/// Runs-type tally over the exceedances of `sample` at `sites`: a success is
/// an exceedance with no exceedance in `A_v`. The sample must cover
/// `sites ⊕ [-r, r]`.
pub fn neighborhood_tally<T: Scalar>(
    sample: &FieldSample<T>,
    x: T,
    sites: &PointSet,
    neighborhood: &OrderNeighborhood,
) -> Result<Tally> {
    if sites.is_empty() {
        return Ok(Tally::default());
    }
    let r = neighborhood.radius();
    let reach = sites.bounding_box().expanded(r, r);
    sample.check_covers_box(&reach)?;
    let exc: Vec<Point> = reach.iter().filter(|v| sample.get(v).unwrap() > x).collect();
    let mut tally = Tally::default();
    for i in 0..exc.len() {
        if !sites.contains(&exc[i]) {
            continue;
        }
        tally.exceedances += 1;
        if !any_successor(&exc, i, r[0], |o| neighborhood.contains_offset(o)) {
            tally.successes += 1;
        }
    }
    Ok(tally)
}

/// Resolved geometry, threshold and lookup tables for one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSetup<T> {
    pub config: ExperimentConfig<T>,
    pub region: LatticeRegion<T>,
    pub partition: BlockPartition,
    pub dependence: DependenceSpec,
    pub threshold: ThresholdSchedule<T>,
    /// Simulation support: `D_n` and `D̃` with a margin covering every
    /// neighbourhood used.
    pub support: LatticeBox,
    pub family: Option<RealizedFamily>,
    dn_index: Vec<usize>,
    dn_mask: Vec<bool>,
    block_slot: Vec<u32>,
    runs_nb: Vec<OrderNeighborhood>,
    local_nb: OrderNeighborhood,
    anti_nb: Vec<OrderNeighborhood>,
    top_k: usize,
}

impl<T: Scalar> ExperimentSetup<T> {
    pub fn new(config: ExperimentConfig<T>) -> Result<Self> {
        config.validate()?;
        let d = config.dim();
        let region = LatticeRegion::new(config.generator.clone(), config.scale.clone())?;
        if region.is_empty() {
            return Err(Error::EmptySupport);
        }
        let dependence = config.dependence();
        let k = config.k.unwrap_or_else(|| default_block_count(&config.scale, &dependence));
        let partition = BlockPartition::build(&region, k)?;
        let threshold = threshold(config.model.marginal(), region.len(), config.tau)?;

        let est = &config.estimators;
        let order = OrderSpec::Lexicographic;
        let runs_nb: Vec<_> = est
            .runs_m
            .iter()
            .map(|m| OrderNeighborhood::new(d, &NeighborhoodMode::Fixed(*m), order))
            .collect();
        let anti_nb: Vec<_> = est
            .anti_clustering_m
            .iter()
            .map(|m| OrderNeighborhood::new(d, &NeighborhoodMode::Fixed(*m), order))
            .collect();
        let local_nb = OrderNeighborhood::new(d, &NeighborhoodMode::Block(partition.t.clone()), order);

        let max_m = est.runs_m.iter().chain(&est.anti_clustering_m).copied().max().unwrap_or(0) as i64;
        let margin: Vec<i64> = partition.t.iter().map(|t| (*t).max(max_m)).collect();
        let support = region
            .points()
            .bounding_box()
            .hull(&partition.d_tilde_hull())
            .expanded(&margin, &margin);

        let dn_index: Vec<usize> = region
            .points()
            .iter()
            .map(|v| support.index_of(v).expect("D_n inside the support"))
            .collect();
        let mut dn_mask = vec![false; support.len()];
        for i in &dn_index {
            dn_mask[*i] = true;
        }
        let mut block_slot = vec![0u32; support.len()];
        for (slot, z) in partition.anchored.iter().enumerate() {
            for v in partition.block(z).iter() {
                block_slot[support.index_of(&v).expect("D̃ inside the support")] = slot as u32 + 1;
            }
        }
        let family = config.family.as_ref().map(|f| f.realize(&region)).transpose()?;
        let top_k = est.order_statistics.iter().copied().max().unwrap_or(1).max(1);
        Ok(Self {
            config,
            region,
            partition,
            dependence,
            threshold,
            support,
            family,
            dn_index,
            dn_mask,
            block_slot,
            runs_nb,
            local_nb,
            anti_nb,
            top_k,
        })
    }

    /// The threshold `x_n`.
    pub fn level(&self) -> T {
        self.threshold.level
    }

    pub fn simulate(&self, replication: u64) -> Result<FieldSample<T>> {
        simulate_box(&self.config.model, &self.support, self.config.seed, replication)
    }

    /// The three cluster measures of one sample simulated on the support.
    pub fn measures(&self, sample: &FieldSample<T>) -> [ClusterMeasure<T>; 3] {
        let x = self.level();
        let exc = self.support_exceedances(sample);
        self.measures_from(&exc, x)
    }

    fn support_exceedances(&self, sample: &FieldSample<T>) -> Vec<(usize, Point)> {
        let x = self.level();
        sample
            .raw_values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > x)
            .map(|(i, _)| (i, self.support.point_at(i)))
            .collect()
    }

    fn measures_from(&self, exc: &[(usize, Point)], x: T) -> [ClusterMeasure<T>; 3] {
        let scale = self.region.scale();
        let mut per_block = vec![Vec::new(); self.partition.q_minus()];
        for (i, v) in exc {
            let slot = self.block_slot[*i];
            if slot > 0 {
                per_block[slot as usize - 1].push(v.clone());
            }
        }
        let distance = distance_from_blocks(&per_block, x, &self.partition, scale);
        let grid = grid_from_blocks(per_block, x, &self.partition, scale);
        let in_dn = exc.iter().filter(|(i, _)| self.dn_mask[*i]).map(|(_, v)| v.clone()).collect();
        let exceedance = exceedance_from_points(in_dn, x, scale);
        [grid, distance, exceedance]
    }

    pub fn replicate(&self, replication: u64) -> Result<ReplicationRow> {
        let sample = self.simulate(replication)?;
        let x = self.level();
        let values = sample.raw_values();

        let mut top: Vec<f64> = Vec::with_capacity(self.top_k + 1);
        for &i in &self.dn_index {
            let v = values[i].as_f64();
            if top.len() < self.top_k || v > *top.last().unwrap() {
                let pos = top.partition_point(|t| *t >= v);
                top.insert(pos, v);
                top.truncate(self.top_k);
            }
        }
        let max = top[0];

        let exc = self.support_exceedances(&sample);
        let [grid, distance, exceedance] = self.measures_from(&exc, x);
        let totals = KindCounts {
            grid: grid.len(),
            distance: distance.len(),
            exceedance: exceedance.len(),
        };
        let queries = self
            .config
            .queries
            .iter()
            .map(|q| KindCounts {
                grid: grid.count(&q.query),
                distance: distance.count(&q.query),
                exceedance: exceedance.count(&q.query),
            })
            .collect();

        let drawn_size = if distance.is_empty() {
            None
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(self.config.seed, replication, Stream::ClusterDraw));
            Some(distance.uniform_cluster(&mut rng)?.size())
        };

        let points: Vec<Point> = exc.iter().map(|(_, v)| v.clone()).collect();
        let mut runs = vec![Tally::default(); self.runs_nb.len()];
        let mut local = Tally::default();
        let mut anti = vec![0; self.anti_nb.len()];
        let t = &self.partition.t;
        let reach = t[0].max(self.runs_nb.iter().chain(&self.anti_nb).map(|n| n.radius()[0]).max().unwrap_or(0));
        for (j, (i, _)) in exc.iter().enumerate() {
            if !self.dn_mask[*i] {
                continue;
            }
            for (tally, nb) in runs.iter_mut().zip(&self.runs_nb) {
                tally.exceedances += 1;
                if !any_successor(&points, j, reach, |o| nb.contains_offset(o)) {
                    tally.successes += 1;
                }
            }
            local.exceedances += 1;
            if !any_successor(&points, j, reach, |o| self.local_nb.contains_offset(o)) {
                local.successes += 1;
            }
            for (count, nb) in anti.iter_mut().zip(&self.anti_nb) {
                let isolated = !any_successor(&points, j, reach, |o| nb.contains_offset(o));
                if isolated
                    && any_successor(&points, j, reach, |o| {
                        self.local_nb.contains_offset(o) && !nb.contains_offset(o)
                    })
                {
                    *count += 1;
                }
            }
        }

        let family = self.family.as_ref().map(|f| FamilyCounts {
            grid: grid.original_scale_counts(f),
            distance: distance.original_scale_counts(f),
            exceedance: exceedance.original_scale_counts(f),
        });

        Ok(ReplicationRow {
            replication,
            max,
            top,
            totals,
            queries,
            grid_sizes: grid.sizes(),
            distance_sizes: distance.sizes(),
            drawn_size,
            runs,
            local,
            anti,
            family,
        })
    }

    /// Runs every replication on a pool of `threads` workers (all available
    /// cores when `None`). Rows are ordered by replication index.
    pub fn run(&self, threads: Option<usize>) -> Result<ReplicationTable> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n.max(1));
        }
        let pool = builder
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        let rows = pool.install(|| {
            (0..self.config.replications)
                .into_par_iter()
                .map(|r| self.replicate(r))
                .collect::<Result<Vec<_>>>()
        })?;
        Ok(ReplicationTable {
            rows,
            threshold: self.level().as_f64(),
            region_size: self.region.len(),
            tau: self.config.tau,
            theta: self.config.model.theoretical_theta()?,
            exact_max_cdf: self.config.model.exact_max_cdf(self.region.points(), self.level())?,
            k: self.partition.k,
            t: self.partition.t.clone(),
            p: self.partition.p(),
            q: self.partition.q(),
            q_minus: self.partition.q_minus(),
            query_names: self.config.queries.iter().map(|q| q.name.clone()).collect(),
            runs_m: self.config.estimators.runs_m.clone(),
            anti_m: self.config.estimators.anti_clustering_m.clone(),
            family_fractions: self.family.as_ref().map(|f| f.fractions.clone()),
            realized_fractions: self.family.as_ref().map(|f| f.realized_fractions(self.region.len())),
        })
    }
}

/// Builds the experiment and runs all replications.
pub fn run_experiment<T: Scalar>(config: &ExperimentConfig<T>, threads: Option<usize>) -> Result<ReplicationTable> {
    ExperimentSetup::new(config.clone())?.run(threads)
}
