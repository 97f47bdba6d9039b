use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use exfield::analysis::{evaluate_checks, summarize, ExperimentConfig, ExperimentSetup, ReplicationTable, Summary};
use exfield::clustering::{distance_clusters, exceedance_clusters, grid_clusters, ClusterMeasure};
use exfield::fields::FieldSample;
use exfield::geometry::GeometrySpec;
use exfield::lattice::PointSet;
use serde_json::json;

use crate::output::{num, Outputs};
use crate::{CliError, Common, Status};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn load_experiment(common: &Common) -> Result<ExperimentConfig<f64>, CliError> {
    let mut config = ExperimentConfig::from_json(&read(&common.config)?)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

pub fn geometry_report(common: &Common) -> Result<Status, CliError> {
    let spec = GeometrySpec::<f64>::from_json(&read(&common.config)?)?;
    let rows = spec.table()?;
    let d = spec.generator.dim();
    let mut header: Vec<String> = ["n", "D_n", "C_n", "p", "q", "qminus", "k"].map(String::from).to_vec();
    header.extend((1..=d).map(|l| format!("t_{l}")));
    header.extend((1..d).map(|j| format!("v{j}_sum")));
    header.push("c_bound".into());
    let with_ratio = spec.summand.is_some();
    if with_ratio {
        header.push("minkowski_ratio".into());
    }
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut rec = vec![
                r.n.to_string(),
                r.region_size.to_string(),
                num(r.set_volume),
                r.p.to_string(),
                r.q.to_string(),
                r.q_minus.to_string(),
                r.k.to_string(),
            ];
            rec.extend(r.t.iter().map(i64::to_string));
            match &r.intrinsic_volume_sums {
                Some(v) => rec.extend(v.iter().map(|x| num(*x))),
                None => rec.extend((1..d).map(|_| String::new())),
            }
            rec.push(num(r.bound));
            if with_ratio {
                rec.push(r.minkowski_ratio.map(num).unwrap_or_default());
            }
            rec
        })
        .collect();
    let path = Outputs::new(&common.out)?.write_csv("geometry_report.csv", &header, &records)?;
    println!("geometry-report: {} scales -> {}", rows.len(), path.display());
    Ok(Status::Ok)
}

pub fn simulate(common: &Common, replication: u64) -> Result<Status, CliError> {
    let config = load_experiment(common)?;
    let setup = ExperimentSetup::new(config)?;
    let sample = setup.simulate(replication)?;
    let d = sample.dim();
    let mut header: Vec<String> = (1..=d).map(|l| format!("v_{l}")).collect();
    header.push("value".into());
    let records: Vec<Vec<String>> = sample
        .iter()
        .map(|(v, x)| {
            let mut rec: Vec<String> = v.iter().map(i64::to_string).collect();
            rec.push(num(x));
            rec
        })
        .collect();
    let path = Outputs::new(&common.out)?.write_csv("field.csv", &header, &records)?;
    println!(
        "simulate: replication {replication}, {} sites, threshold {} -> {}",
        records.len(),
        num(setup.level()),
        path.display()
    );
    Ok(Status::Ok)
}

fn read_field(path: &Path, config: &ExperimentConfig<f64>) -> Result<FieldSample<f64>, CliError> {
    let bad = |m: String| CliError::Config(format!("{}: {m}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let d = config.dim();
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let expected: Vec<String> = (1..=d).map(|l| format!("v_{l}")).chain(["value".to_string()]).collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(bad(format!("expected header {}", expected.join(","))));
    }
    let mut entries: Vec<(Vec<i64>, f64)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parse_err = |e: &dyn std::fmt::Display| bad(format!("row {}: {e}", line + 2));
        let v = (0..d)
            .map(|l| record[l].trim().parse::<i64>().map_err(|e| parse_err(&e)))
            .collect::<Result<Vec<_>, _>>()?;
        let x = record[d].trim().parse::<f64>().map_err(|e| parse_err(&e))?;
        entries.push((v, x));
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(bad(format!("duplicate site {:?}", w[0].0)));
    }
    let support = PointSet::from_points(d, entries.iter().map(|(v, _)| v.clone()))?;
    let values: Vec<f64> = entries.iter().map(|(_, x)| *x).collect();
    Ok(FieldSample::from_points(&support, &values, config.model.clone(), config.seed, 0)?)
}

pub fn cluster(common: &Common, field: &Path) -> Result<Status, CliError> {
    let config = load_experiment(common)?;
    let sample = read_field(field, &config)?;
    let setup = ExperimentSetup::new(config)?;
    let x = setup.level();
    let scale = setup.region.scale();
    let measures: [ClusterMeasure<f64>; 3] = [
        grid_clusters(&sample, x, &setup.partition, scale)?,
        distance_clusters(&sample, x, &setup.partition, scale)?,
        exceedance_clusters(&sample, x, setup.region.points(), scale)?,
    ];
    let d = setup.region.dim();
    let mut header: Vec<String> = vec!["cluster_id".into(), "kind".into()];
    header.extend((1..=d).map(|l| format!("rep_{l}")));
    header.push("size".into());
    let mut records = Vec::new();
    let mut kinds = serde_json::Map::new();
    for m in &measures {
        for (id, c) in m.clusters.iter().enumerate() {
            let mut rec = vec![id.to_string(), m.kind.as_str().to_string()];
            rec.extend(c.representative.iter().map(|x| num(*x)));
            rec.push(c.size().to_string());
            records.push(rec);
        }
        let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
        for s in m.sizes() {
            *histogram.entry(s).or_default() += 1;
        }
        kinds.insert(
            m.kind.as_str().into(),
            json!({
                "X": m.len(),
                "sizes": histogram.iter().map(|(s, n)| (s.to_string(), json!(n))).collect::<serde_json::Map<_, _>>(),
            }),
        );
    }
    let out = Outputs::new(&common.out)?;
    let path = out.write_csv("clusters.csv", &header, &records)?;
    out.write_json("cluster_summary.json", &json!({ "threshold": x, "kinds": kinds }))?;
    println!(
        "cluster: N = {}, Ñ = {}, N̄ = {} -> {}",
        measures[0].len(),
        measures[1].len(),
        measures[2].len(),
        path.display()
    );
    Ok(Status::Ok)
}

fn table_records(table: &ReplicationTable) -> (Vec<String>, Vec<Vec<String>>) {
    let kinds = ["grid", "distance", "exceedance"];
    let mut header: Vec<String> = vec!["replication".into(), "max".into()];
    header.extend(kinds.iter().map(|k| format!("{k}_C")));
    for q in &table.query_names {
        header.extend(kinds.iter().map(|k| format!("{k}_{q}")));
    }
    header.extend(["grid_size_sum".into(), "distance_size_sum".into(), "drawn_size".into()]);
    for m in &table.runs_m {
        header.extend([format!("runs_m{m}_exceedances"), format!("runs_m{m}_successes")]);
    }
    header.extend(["local_exceedances".into(), "local_successes".into()]);
    header.extend(table.anti_m.iter().map(|m| format!("anti_m{m}")));
    if let Some(f) = &table.family_fractions {
        for g in 0..f.len() {
            header.extend(kinds.iter().map(|k| format!("family_g{g}_{k}")));
        }
    }
    let top = table.rows.first().map_or(0, |r| r.top.len());
    header.extend((1..=top).map(|k| format!("order_{k}")));

    let rows = table
        .rows
        .iter()
        .map(|r| {
            let mut rec = vec![r.replication.to_string(), num(r.max)];
            let counts = |c: &exfield::analysis::KindCounts| [c.grid, c.distance, c.exceedance].map(|n| n.to_string());
            rec.extend(counts(&r.totals));
            for q in &r.queries {
                rec.extend(counts(q));
            }
            rec.push(r.grid_sizes.iter().sum::<usize>().to_string());
            rec.push(r.distance_sizes.iter().sum::<usize>().to_string());
            rec.push(r.drawn_size.map(|s| s.to_string()).unwrap_or_default());
            for t in &r.runs {
                rec.extend([t.exceedances.to_string(), t.successes.to_string()]);
            }
            rec.extend([r.local.exceedances.to_string(), r.local.successes.to_string()]);
            rec.extend(r.anti.iter().map(usize::to_string));
            if let Some(f) = &r.family {
                for g in 0..f.grid.len() {
                    rec.extend([f.grid[g], f.distance[g], f.exceedance[g]].map(|n| n.to_string()));
                }
            }
            rec.extend(r.top.iter().map(|x| num(*x)));
            rec
        })
        .collect();
    (header, rows)
}

fn summary_document(config: &ExperimentConfig<f64>, table: &ReplicationTable, summary: &Summary, profile: &str) -> serde_json::Value {
    json!({
        "seed": config.seed,
        "replications": table.len(),
        "tolerance_profile": profile,
        "threshold": table.threshold,
        "region_size": table.region_size,
        "k": table.k,
        "t": table.t,
        "p": table.p,
        "q": table.q,
        "qminus": table.q_minus,
        "realized_fractions": table.realized_fractions,
        "passed": summary.passed(),
        "checks": summary.checks,
        "statistics": summary.statistics,
        "gof": summary.gof,
        "independence": summary.independence,
        "notes": summary.notes,
    })
}

fn finish(summary: &Summary, label: &str, detail: String) -> Status {
    let failed: Vec<&str> = summary
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.statistic.as_str())
        .collect();
    let verdict = if failed.is_empty() {
        "all checks passed".to_string()
    } else {
        format!("failed checks: {}", failed.join(", "))
    };
    println!(
        "{label}: {detail}, {}/{} checks passed ({verdict})",
        summary.checks.len() - failed.len(),
        summary.checks.len()
    );
    if failed.is_empty() {
        Status::Ok
    } else {
        Status::ChecksFailed
    }
}

fn profile_name(common: &Common) -> &'static str {
    match common.tolerance_profile {
        crate::Profile::Desk => "desk",
        crate::Profile::Strict => "strict",
    }
}

pub fn experiment(common: &Common) -> Result<Status, CliError> {
    let config = load_experiment(common)?;
    let setup = ExperimentSetup::new(config.clone())?;
    let table = setup.run(common.threads)?;
    let mut summary = summarize(&table, &config);
    summary.checks = evaluate_checks(&summary, &config.checks, common.tolerance_profile.into());

    let out = Outputs::new(&common.out)?;
    let (header, rows) = table_records(&table);
    out.write_csv("replications.csv", &header, &rows)?;
    let mut table_json = serde_json::to_string(&table).map_err(|e| CliError::Runtime(e.to_string()))?;
    table_json.push('\n');
    out.write("table.json", table_json.as_bytes())?;
    out.write_json("summary.json", &summary_document(&config, &table, &summary, profile_name(common)))?;
    Ok(finish(
        &summary,
        "experiment",
        format!("{} replications, |D_n| = {} -> {}", table.len(), table.region_size, common.out.display()),
    ))
}

pub fn report(common: &Common, table_path: &Path) -> Result<Status, CliError> {
    let config = load_experiment(common)?;
    let table: ReplicationTable = serde_json::from_str(&read(table_path)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", table_path.display())))?;
    let mut summary = summarize(&table, &config);
    summary.checks = evaluate_checks(&summary, &config.checks, common.tolerance_profile.into());

    let out = Outputs::new(&common.out)?;
    let header = ["statistic", "value", "se"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = summary
        .statistics
        .iter()
        .map(|(k, e)| vec![k.clone(), num(e.value), num(e.se)])
        .collect();
    out.write_csv("statistics.csv", &header, &rows)?;
    out.write_json("report.json", &summary_document(&config, &table, &summary, profile_name(common)))?;
    Ok(finish(
        &summary,
        "report",
        format!("{} replications from {}", table.len(), table_path.display()),
    ))
}
