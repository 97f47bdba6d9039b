use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{Check, ExperimentConfig};
use super::estimators::*;
use super::run::ReplicationTable;
use super::stats::{independence_check, poisson_gof, Estimate, GofReport, IndependenceReport};
use crate::clustering::ClusterKind;
use crate::Scalar;

const KINDS: [ClusterKind; 3] = [ClusterKind::Grid, ClusterKind::Distance, ClusterKind::Exceedance];

/// How acceptance tolerances are applied: `strict` halves every
/// `target ± tolerance` band.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceProfile {
    #[default]
    Desk,
    Strict,
}

impl ToleranceProfile {
    pub fn factor(self) -> f64 {
        match self {
            Self::Desk => 1.0,
            Self::Strict => 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub statistic: String,
    pub value: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    pub passed: bool,
}

/// All estimates of an experiment keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    pub statistics: BTreeMap<String, Estimate>,
    pub gof: BTreeMap<String, GofReport>,
    pub independence: BTreeMap<String, IndependenceReport>,
    pub notes: Vec<String>,
    pub checks: Vec<CheckOutcome>,
}

impl Summary {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.statistics.get(name).map(|e| e.value)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn put(&mut self, name: String, est: crate::Result<Estimate>) {
        match est {
            Ok(e) => {
                self.statistics.insert(name, e);
            }
            Err(e) => self.notes.push(format!("{name}: {e}")),
        }
    }

    fn put_gof(&mut self, name: String, counts: &[usize], intensity: f64) {
        match poisson_gof(counts, intensity) {
            Ok(g) => {
                self.statistics.insert(
                    format!("{name}.mean"),
                    Estimate {
                        value: g.mean,
                        se: g.se_mean,
                    },
                );
                self.statistics.insert(
                    format!("{name}.var_mean_ratio"),
                    Estimate {
                        value: g.var_mean_ratio,
                        se: g.se_var_mean_ratio,
                    },
                );
                self.statistics
                    .insert(format!("{name}.tv"), Estimate::exact(g.total_variation));
                if let Some(p) = g.chi_square_p {
                    self.statistics.insert(format!("{name}.chi2_p"), Estimate::exact(p));
                }
                self.gof.insert(name, g);
            }
            Err(e) => self.notes.push(format!("{name}: {e}")),
        }
    }
}

/// Computes every estimator the table supports.
pub fn summarize<T: Scalar>(table: &ReplicationTable, config: &ExperimentConfig<T>) -> Summary {
    let mut s = Summary::default();
    let x = table.threshold;
    let theta = table.theta;
    let tau = table.tau;

    s.statistics.insert("threshold".into(), Estimate::exact(x));
    s.statistics.insert("region_size".into(), Estimate::exact(table.region_size as f64));
    s.statistics.insert("theta".into(), Estimate::exact(theta));
    s.put("max_cdf".into(), estimate_max_cdf(table, x));
    s.statistics.insert("max_cdf_exact".into(), Estimate::exact(table.exact_max_cdf));
    s.statistics.insert("max_cdf_limit".into(), Estimate::exact((-theta * tau).exp()));

    for m in &table.runs_m {
        s.put(format!("theta_runs.m{m}"), estimate_theta_runs(table, *m));
    }
    s.put("theta_local".into(), estimate_local_index(table));
    for m in &table.anti_m {
        s.put(
            format!("anti_clustering.m{m}"),
            anti_clustering_diagnostic(table, *m).map(|a| a.estimate),
        );
    }
    match representation_check(table) {
        Ok(r) => {
            s.statistics.insert("representation.lhs".into(), r.lhs);
            s.statistics.insert("representation.rhs".into(), r.rhs);
            s.statistics
                .insert("representation.difference".into(), Estimate::exact(r.difference));
        }
        Err(e) => s.notes.push(format!("representation: {e}")),
    }

    let c_volume = config.generator.volume().as_f64();
    for kind in KINDS {
        let base = if kind == ClusterKind::Exceedance { tau } else { theta * tau };
        s.put_gof(format!("{}.C", kind.as_str()), &count_column(table, kind, None), base);
        for (qi, q) in config.queries.iter().enumerate() {
            let intensity = base * q.query.volume() / c_volume;
            s.put_gof(
                format!("{}.{}", kind.as_str(), q.name),
                &count_column(table, kind, Some(qi)),
                intensity,
            );
        }
    }
    s.put("grid_distance_disagreement".into(), grid_distance_disagreement(table));

    for kind in KINDS {
        s.put(
            format!("cluster_size.{}.pooled", kind.as_str()),
            pooled_cluster_size(table, kind),
        );
    }
    s.put(
        "cluster_size.distance.uniform".into(),
        mean_cluster_size(table, ClusterKind::Distance, SizeCondition::Positive),
    );
    for l in &config.estimators.cluster_size_given {
        for kind in [ClusterKind::Grid, ClusterKind::Distance] {
            s.put(
                format!("cluster_size.{}.given{l}", kind.as_str()),
                mean_cluster_size(table, kind, SizeCondition::Total(*l)),
            );
        }
    }

    for k in &config.estimators.order_statistics {
        s.put(format!("order_stat.k{k}"), order_statistic_cdf(table, *k, x));
        s.put(format!("exceedance_cdf.k{k}"), exceedance_count_cdf(table, *k));
        s.statistics
            .insert(format!("order_stat_limit.k{k}"), Estimate::exact(poisson_cdf(tau, *k)));
        let violations = table
            .rows
            .iter()
            .filter(|r| r.top.get(k - 1).is_some_and(|v| *v <= x) != (r.totals.exceedance < *k))
            .count();
        s.statistics.insert(
            format!("order_stat.identity_violations.k{k}"),
            Estimate::exact(violations as f64),
        );
    }

    if let (Some(fractions), Some(_)) = (&table.family_fractions, table.rows.first().and_then(|r| r.family.as_ref())) {
        for kind in KINDS {
            let base = if kind == ClusterKind::Exceedance { tau } else { theta * tau };
            let matrix: Vec<Vec<usize>> = table
                .rows
                .iter()
                .map(|r| {
                    let f = r.family.as_ref().expect("family counts recorded");
                    match kind {
                        ClusterKind::Grid => f.grid.clone(),
                        ClusterKind::Distance => f.distance.clone(),
                        ClusterKind::Exceedance => f.exceedance.clone(),
                    }
                })
                .collect();
            for (g, b) in fractions.iter().enumerate() {
                let column: Vec<usize> = matrix.iter().map(|r| r[g]).collect();
                s.put_gof(format!("family.{}.g{g}", kind.as_str()), &column, (b * base).max(f64::MIN_POSITIVE));
            }
            if fractions.len() >= 2 {
                let rows: Vec<Vec<f64>> = matrix
                    .iter()
                    .map(|r| r.iter().map(|c| *c as f64).collect())
                    .collect();
                let name = format!("family.{}", kind.as_str());
                match independence_check(&rows) {
                    Ok(rep) => {
                        if let Some(m) = rep.max_abs {
                            s.statistics.insert(format!("{name}.max_abs_corr"), Estimate::exact(m));
                        }
                        s.independence.insert(name, rep);
                    }
                    Err(e) => s.notes.push(format!("{name}: {e}")),
                }
            }
        }
    }

    s.checks = evaluate_checks(&s, &config.checks, ToleranceProfile::Desk);
    s
}

pub fn evaluate_checks(summary: &Summary, checks: &[Check], profile: ToleranceProfile) -> Vec<CheckOutcome> {
    checks
        .iter()
        .map(|c| {
            let (lower, upper) = match (c.target, c.tolerance) {
                (Some(t), Some(tol)) => {
                    let tol = tol * profile.factor();
                    (t - tol, t + tol)
                }
                _ => (c.min.unwrap_or(f64::NEG_INFINITY), c.max.unwrap_or(f64::INFINITY)),
            };
            let value = summary.value(&c.statistic);
            CheckOutcome {
                statistic: c.statistic.clone(),
                value,
                lower,
                upper,
                passed: value.is_some_and(|v| lower <= v && v <= upper),
            }
        })
        .collect()
}
