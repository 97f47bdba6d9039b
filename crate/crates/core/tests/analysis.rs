use exfield::analysis::{
    estimate_max_cdf, order_statistic_cdf, poisson_gof, run_experiment, summarize, ExperimentConfig,
    ToleranceProfile, evaluate_checks, Check,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EX_IID: &str = include_str!("../../../configs/ex_iid.json");
const EX_MM: &str = include_str!("../../../configs/ex_mm.json");

fn config(text: &str) -> ExperimentConfig<f64> {
    ExperimentConfig::from_json(text).unwrap()
}

#[test]
fn tables_do_not_depend_on_thread_count() {
    for text in [EX_IID, EX_MM] {
        let c = config(text);
        let one = run_experiment(&c, Some(1)).unwrap();
        let many = run_experiment(&c, Some(8)).unwrap();
        assert_eq!(one, many);
        assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&many).unwrap());
    }
}

#[test]
fn config_round_trip() {
    for text in [
        EX_IID,
        EX_MM,
        include_str!("../../../configs/desk_mm.json"),
        include_str!("../../../configs/desk_iid.json"),
    ] {
        let c = config(text);
        let again = ExperimentConfig::<f64>::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(c, again);
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let mut v: serde_json::Value = serde_json::from_str(EX_IID).unwrap();
    v["estimators"] = serde_json::json!({ "runs_m": [2], "bogus": true });
    let err = ExperimentConfig::<f64>::from_json(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("bogus"), "{err}");
}

#[test]
fn runs_successes_shrink_with_m() {
    let mut c = config(EX_MM);
    c.estimators.runs_m = vec![1, 2, 3, 4];
    let table = run_experiment(&c, None).unwrap();
    for row in &table.rows {
        let s: Vec<usize> = row.runs.iter().map(|t| t.successes).collect();
        assert!(s.windows(2).all(|w| w[1] <= w[0]), "{s:?}");
        assert!(row.runs.iter().all(|t| t.exceedances == row.totals.exceedance));
    }
}

#[test]
fn order_statistic_identity_and_first_rank() {
    let mut c = config(EX_IID);
    c.estimators.order_statistics = vec![1, 2, 3, 5];
    let table = run_experiment(&c, None).unwrap();
    let x = table.threshold;
    assert_eq!(
        order_statistic_cdf(&table, 1, x).unwrap(),
        estimate_max_cdf(&table, x).unwrap()
    );
    for k in [1usize, 2, 3, 5] {
        let via_counts = table.rows.iter().filter(|r| r.totals.exceedance < k).count();
        let via_order = table.rows.iter().filter(|r| r.top[k - 1] <= x).count();
        assert_eq!(via_counts, via_order);
    }
    // Beyond every realised count the probability is one.
    let top = table.rows.iter().map(|r| r.totals.exceedance).max().unwrap();
    let mut c = c.clone();
    c.estimators.order_statistics = vec![top + 1];
    let table = run_experiment(&c, None).unwrap();
    assert_eq!(order_statistic_cdf(&table, top + 1, x).unwrap().value, 1.0);
}

#[test]
fn standard_errors_scale_with_replications() {
    let mut c = config(EX_IID);
    c.replications = 800;
    let small = summarize(&run_experiment(&c, None).unwrap(), &c);
    c.replications = 1600;
    let large = summarize(&run_experiment(&c, None).unwrap(), &c);
    let ratio = small.statistics["max_cdf"].se / large.statistics["max_cdf"].se;
    assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.1, "SE ratio {ratio}");
}

#[test]
fn strict_profile_halves_bands() {
    let c = config(EX_IID);
    let s = summarize(&run_experiment(&c, None).unwrap(), &c);
    let v = s.value("max_cdf").unwrap();
    let check = Check::within("max_cdf", v + 0.06, 0.1);
    assert!(evaluate_checks(&s, std::slice::from_ref(&check), ToleranceProfile::Desk)[0].passed);
    assert!(!evaluate_checks(&s, &[check], ToleranceProfile::Strict)[0].passed);
    let missing = Check::between("no_such_statistic", Some(0.0), None);
    assert!(!evaluate_checks(&s, &[missing], ToleranceProfile::Desk)[0].passed);
}

fn poisson_draw(rng: &mut impl Rng, lambda: f64) -> usize {
    let limit = (-lambda).exp();
    let mut k = 0;
    let mut p: f64 = rng.gen();
    while p > limit {
        k += 1;
        p *= rng.gen::<f64>();
    }
    k
}

#[test]
fn gof_is_calibrated_on_exact_poisson_draws() {
    let seeds = 200;
    let passed = (0..seeds)
        .filter(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let counts: Vec<usize> = (0..4000).map(|_| poisson_draw(&mut rng, 0.5)).collect();
            let g = poisson_gof(&counts, 0.5).unwrap();
            g.total_variation <= 0.02 && (0.9..=1.1).contains(&g.var_mean_ratio)
        })
        .count();
    assert!(passed as f64 >= 0.95 * seeds as f64, "{passed}/{seeds}");
}
