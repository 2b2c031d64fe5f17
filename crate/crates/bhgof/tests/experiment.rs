use bhgof::experiment::*;
use bhgof::parallel::PoolExecutor;
use bhgof_core::alternatives::AlternativeSpec;
use serde_json::Value;

fn small(mode: Mode, specs: Vec<AlternativeSpec>, reps: usize) -> ExperimentConfig {
    ExperimentConfig {
        mode,
        specs,
        n: vec![30],
        bootstrap: 99,
        reps,
        alphas: vec![0.05, 0.10],
        weights: vec![[0.0, 0.0], [1.0, 1.0]],
        master_seed: 77,
        workers: 1,
        fix_lambda3: true,
    }
}

fn null() -> AlternativeSpec {
    AlternativeSpec::Hermite { params: [1.0, 0.8, 0.5, 0.5, 0.0] }
}

#[test]
fn results_independent_of_worker_count() {
    let cfg = small(Mode::Type1, vec![null()], 12);
    let a = run_experiment(&cfg, &PoolExecutor::new(1).unwrap()).unwrap();
    let b = run_experiment(&cfg, &PoolExecutor::new(8).unwrap()).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.rows.len(), 4);
}

#[test]
fn single_rep_cells_are_zero_or_one() {
    let cfg = small(Mode::Type1, vec![null()], 1);
    let t = run_experiment(&cfg, &PoolExecutor::new(1).unwrap()).unwrap();
    for r in &t.rows {
        let rate = r.rate.unwrap();
        assert!(rate == 0.0 || rate == 1.0);
        assert_eq!(r.datasets + r.failures, 1);
    }
}

#[test]
fn csv_and_json_round_trip() {
    let cfg = small(
        Mode::Power,
        vec![null(), AlternativeSpec::Binomial { m: 1, p1: 0.41, p2: 0.02, p3: 0.01 }],
        5,
    );
    let t = run_experiment(&cfg, &PoolExecutor::new(2).unwrap()).unwrap();
    assert_eq!(table_from_csv(&table_to_csv(&t)).unwrap(), t);
    let back: ResultTable = serde_json::from_str(&table_to_json(&t)).unwrap();
    assert_eq!(back, t);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    emit_table(&t, &path, TableFormat::Csv).unwrap();
    assert_eq!(table_from_csv(&std::fs::read_to_string(&path).unwrap()).unwrap(), t);
    assert!(emit_table(&t, &dir.path().join("missing/t.csv"), TableFormat::Csv).is_err());
}

#[test]
fn json_matches_documented_schema() {
    let cfg = small(Mode::Power, vec![AlternativeSpec::Poisson { l1: 1.0, l2: 1.0, l3: 0.25 }], 3);
    let t = run_experiment(&cfg, &PoolExecutor::new(1).unwrap()).unwrap();
    let v: Value = serde_json::from_str(&table_to_json(&t)).unwrap();
    assert_eq!(v["mode"], "power");
    assert!(v["metadata"].as_object().unwrap().values().all(Value::is_string));
    for key in ["master_seed", "bootstrap", "reps", "fix_lambda3", "conventions", "runtime_seconds"] {
        assert!(v["metadata"].get(key).is_some(), "{key}");
    }
    for row in v["rows"].as_array().unwrap() {
        let row = row.as_object().unwrap();
        let keys: Vec<&str> = row.keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 11);
        assert!(row["spec"].is_string());
        for k in ["n", "rejections", "datasets", "failures"] {
            assert!(row[k].is_u64(), "{k}");
        }
        for k in ["a1", "a2", "alpha", "rate", "se"] {
            assert!(row[k].is_number(), "{k}");
        }
        let pct = row["percent"].as_u64().unwrap();
        assert!(pct <= 100);
        assert_eq!(pct, (row["rate"].as_f64().unwrap() * 100.0).round() as u64);
    }
}

#[test]
fn null_as_alternative_rejects_at_about_alpha() {
    let mut cfg = small(Mode::Power, vec![null()], 150);
    cfg.weights = vec![[1.0, 1.0]];
    cfg.alphas = vec![0.10];
    let t = run_experiment(&cfg, &PoolExecutor::new(0).unwrap()).unwrap();
    let r = &t.rows[0];
    let rate = r.rate.unwrap();
    let se = (0.10f64 * 0.90 / r.datasets as f64).sqrt();
    assert!((rate - 0.10).abs() <= 3.0 * se, "rate {rate}, 3 SE {}", 3.0 * se);
}

#[test]
fn type1_rows_carry_standard_errors() {
    let t = run_experiment(&small(Mode::Type1, vec![null()], 6), &PoolExecutor::new(1).unwrap()).unwrap();
    for r in &t.rows {
        let p = r.rate.unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert!((r.se.unwrap() - (p * (1.0 - p) / r.datasets as f64).sqrt()).abs() < 1e-15);
        assert_eq!(r.percent, None);
    }
}
