use ghfit::harness::{
    dgm_params, penalty_curve, replicate_seeds, run_experiment, simulate, ContingencyTable, CurveKind, CurveParam,
    ExperimentConfig, DGMS,
};
use ghfit::penalty::{PenaltyKind, ShapeParams};
use ghfit::select::ModelName;
use nalgebra::DVector;
use std::fs;

fn small_config(dir: &std::path::Path, workers: usize) -> ExperimentConfig {
    let text = format!(
        r#"
dgms = ["t", "N"]
n = 80
replicates = 2
grid = [0, 20]
p = 0.025
seed = 17
workers = {workers}
output_dir = "out{workers}"
"#
    );
    fs::write(dir.join("exp.toml"), &text).unwrap();
    ExperimentConfig::from_path(&dir.join("exp.toml")).unwrap()
}

#[test]
fn experiment_writes_records_and_a_consistent_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 1);
    assert_eq!(cfg.output_dir, dir.path().join("out1"));
    let out = run_experiment(&cfg).unwrap();
    for dgm in [ModelName::T, ModelName::N] {
        assert_eq!(out.table.column_total(dgm).unwrap() + out.table.failed[cfg.dgms.iter().position(|&m| m == dgm).unwrap()], 2);
        for r in 0..2 {
            let path = cfg.output_dir.join(format!("{}_{:03}.json", dgm.as_str(), r));
            let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
            assert_eq!(v["replicate"], r);
        }
    }
    assert_eq!(out.records.len(), 4);
    let csv = fs::read_to_string(cfg.output_dir.join("table.csv")).unwrap();
    assert_eq!(csv, out.table.to_csv());
    assert_eq!(csv.lines().count(), 18);
    assert!(cfg.output_dir.join("config.json").exists());

    // the same seed gives the same study regardless of the number of workers
    let cfg2 = small_config(dir.path(), 2);
    let out2 = run_experiment(&cfg2).unwrap();
    assert_eq!(out.table, out2.table);
    for (a, b) in out.records.iter().zip(&out2.records) {
        assert_eq!(a.seeds, b.seeds);
        assert_eq!(a.h_star, b.h_star);
        assert_eq!(a.scores, b.scores);
    }
}

#[test]
fn config_rejects_unknown_keys_and_bad_values() {
    let base = std::path::Path::new("/tmp");
    let ok = "dgms = [\"t\"]\nn = 100\nreplicates = 1\nseed = 1\noutput_dir = \"o\"\n";
    let cfg = ExperimentConfig::parse(ok, base).unwrap();
    assert_eq!(cfg.grid.len(), 15);
    assert_eq!(cfg.p, 0.1);
    assert_eq!(cfg.d, 2);
    assert_eq!(cfg.penalty, PenaltyKind::Hier16);
    assert!(ExperimentConfig::parse(&format!("{ok}colour = 3\n"), base).is_err());
    assert!(ExperimentConfig::parse(&ok.replace("n = 100", "n = 5"), base).is_err());
    assert!(ExperimentConfig::parse(&ok.replace("[\"t\"]", "[\"t\", \"t\"]"), base).is_err());
    assert!(ExperimentConfig::parse(&ok.replace("[\"t\"]", "[\"Q\"]"), base).is_err());
    assert!(ExperimentConfig::parse(&ok.replace("replicates = 1", "replicates = 0"), base).is_err());
    assert!(ExperimentConfig::parse(&format!("{ok}p = 1.5\n"), base).is_err());
    // skewed data-generating models are defined for d = 2 only
    assert!(ExperimentConfig::parse(&format!("{}d = 3\n", ok.replace("[\"t\"]", "[\"St\"]")), base).is_err());
}

#[test]
fn replicate_seeds_are_distinct_and_stable() {
    let mut all = Vec::new();
    for g in 0..DGMS.len() {
        for r in 0..10 {
            let s = replicate_seeds(20240601, g, r);
            assert_eq!(s, replicate_seeds(20240601, g, r));
            all.push(s.data);
            all.push(s.lcv);
        }
    }
    let mut sorted = all.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), all.len());
}

#[test]
fn failed_replicates_are_counted_separately() {
    let mut t = ContingencyTable::new(&[ModelName::T, ModelName::N]);
    t.record(ModelName::T, Some(ModelName::T)).unwrap();
    t.record(ModelName::T, None).unwrap();
    t.record(ModelName::N, Some(ModelName::St)).unwrap();
    assert_eq!(t.tpc(ModelName::T).unwrap(), 1);
    assert_eq!(t.count(ModelName::St, ModelName::N).unwrap(), 1);
    assert_eq!(t.total_failed(), 1);
    assert!(t.to_csv().lines().last().unwrap().starts_with("failed,1,0"));
    assert!(t.record(ModelName::AL, None).is_err());
}

#[test]
fn simulated_data_follow_the_configured_model() {
    let data = simulate(ModelName::SGH, 20_000, 2, 3).unwrap();
    let theta = dgm_params(ModelName::SGH, 2).unwrap();
    assert_eq!(theta.lambda, -1.0);
    // E[X] = μ + E[W]γ = 0 and Cov = E[W]Σ for γ = 0
    let mean = data.mean();
    assert!(mean.amax() < 0.05);
    let cov = data.covariance();
    let w_mean = cov.trace() / 2.0;
    assert!((cov[(0, 1)]).abs() < 0.05 * w_mean);
    assert_eq!(simulate(ModelName::SGH, 50, 2, 3).unwrap(), simulate(ModelName::SGH, 50, 2, 3).unwrap());
}

#[test]
fn penalty_curve_sweeps_the_requested_range() {
    let fixed = ShapeParams::new(DVector::zeros(2), -1.0, 2.0, 1e-3);
    let rows = penalty_curve(&CurveKind::Lasso { theta0: 0.0 }, CurveParam::Lambda, (-2.0, 2.0), 5, 3.0, &fixed, 2).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0], (-2.0, 6.0));
    assert_eq!(rows[2], (0.0, 0.0));
    assert_eq!(rows[4], (2.0, 6.0));
    let mc = penalty_curve(
        &CurveKind::McLasso { targets: vec![-1.0, 1.0] },
        CurveParam::Lambda,
        (-1.0, 1.0),
        3,
        1.0,
        &fixed,
        2,
    )
    .unwrap();
    assert_eq!(mc, vec![(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)]);
    let shape = penalty_curve(&CurveKind::Shape(PenaltyKind::Hier16), CurveParam::Psi, (0.0, 1.0), 11, 10.0, &fixed, 2).unwrap();
    assert!(shape.iter().all(|&(_, p)| p >= 0.0 && p.is_finite()));
    assert!(penalty_curve(&CurveKind::Shape(PenaltyKind::Hier16), CurveParam::Chi, (-1.0, 1.0), 5, 1.0, &fixed, 2).is_err());
    assert!(penalty_curve(&CurveKind::Lasso { theta0: 0.0 }, CurveParam::Chi, (1.0, 2.0), 1, 1.0, &fixed, 2).is_err());
}
