use ordkern::graph::{generate_dataset, Label, LabeledDataset, PlantSpec};
use ordkern::kernels::{gram, KernelConfig, MatchMode};
use ordkern::learn::{loocv, robustness_eval, EvalOptions, TuningMode};
use ordkern::{Error, Exec};

fn small_planted(per_class: usize, seed: u64) -> LabeledDataset {
    let a = PlantSpec::new(vec![0, 1, 2, 3], 0.9);
    let b = PlantSpec::new(vec![3, 2, 1, 0], 0.9);
    generate_dataset(per_class, 8, 60, (&a, &b), seed).unwrap()
}

fn quick(match_mode: MatchMode) -> EvalOptions {
    EvalOptions {
        kernel: KernelConfig {
            match_mode,
            ..Default::default()
        },
        lambdas: vec![0.1, 1.0],
        cs: vec![0.01, 1.0, 100.0],
        ..Default::default()
    }
}

#[test]
fn one_fold_per_sample() {
    let ds = small_planted(5, 1);
    let r = loocv(&ds, &quick(MatchMode::Positional)).unwrap();
    assert_eq!(r.per_fold.len(), 10);
    assert_eq!(r.n_folds, 10);
    let ids: Vec<&str> = r.per_fold.iter().map(|f| f.id.as_str()).collect();
    assert_eq!(ids, ds.ids().iter().map(String::as_str).collect::<Vec<_>>());
    assert!(r.lambda_grid.contains(&r.best_lambda));
    assert!(r.c_grid.contains(&r.best_c));
    assert!(r.max_kkt_residual <= 1e-3);
}

#[test]
fn zero_rate_reproduces_baseline() {
    let ds = small_planted(5, 2);
    let r = robustness_eval(&ds, &[0.0], &[0, 1], &quick(MatchMode::Positional)).unwrap();
    assert_eq!(r.runs.len(), 2);
    for run in &r.runs {
        assert_eq!(run.report, r.baseline);
    }
}

#[test]
fn full_removal_leaves_majority_vote() {
    // Every structural Gram entry is 0 once all edges are gone, so each fold
    // predicts the majority of its training set: the class opposite to the
    // held-out sample on balanced data.
    let ds = small_planted(4, 3);
    let r = robustness_eval(&ds, &[1.0], &[5], &quick(MatchMode::Structural)).unwrap();
    let run = &r.runs[0];
    assert_eq!(run.report.accuracy, 0.0);
    assert_eq!(run.report.n_failures, 0);
    for f in &run.report.per_fold {
        assert_eq!(f.predicted, Some(f.true_label.flip()));
    }

    let stripped = ds.map_graphs(|_, g| Ok(g.retain_edges(|_| false))).unwrap();
    let cfg = KernelConfig {
        match_mode: MatchMode::Structural,
        ..Default::default()
    };
    let g = gram(&stripped, &cfg, Exec::Sequential).unwrap();
    assert!(g.values().iter().all(|&v| v == 0.0));
}

#[test]
fn robustness_rejects_bad_rates() {
    let ds = small_planted(3, 4);
    let err = robustness_eval(&ds, &[1.5], &[0], &quick(MatchMode::Positional)).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)), "{err}");
}

#[test]
fn non_nested_mode_uses_one_grid_point() {
    let ds = small_planted(5, 5);
    let nested = loocv(&ds, &quick(MatchMode::Positional)).unwrap();
    let flat = loocv(
        &ds,
        &EvalOptions {
            tuning: TuningMode::NonNested,
            ..quick(MatchMode::Positional)
        },
    )
    .unwrap();
    assert_eq!(nested.tuning, TuningMode::Nested);
    assert_eq!(flat.tuning, TuningMode::NonNested);
    // a single grid point for every fold in non-nested mode
    assert!(flat
        .per_fold
        .iter()
        .all(|f| f.lambda == Some(flat.best_lambda) && f.c == Some(flat.best_c)));
}

#[test]
fn loocv_preconditions() {
    let ds = small_planted(1, 6);
    assert!(matches!(
        loocv(&ds, &quick(MatchMode::Positional)),
        Err(Error::InvalidArgument(_))
    ));
    let ds = small_planted(3, 6);
    let one_class = ds.with_labels(vec![Label::Pos; 6]).unwrap();
    assert!(matches!(
        loocv(&one_class, &quick(MatchMode::Positional)),
        Err(Error::SingleClass)
    ));
}

#[test]
fn report_is_serializable_and_stable() {
    let ds = small_planted(4, 7);
    let a = loocv(&ds, &quick(MatchMode::Structural)).unwrap();
    let b = loocv(&ds, &quick(MatchMode::Structural)).unwrap();
    let json = serde_json::to_string(&a).unwrap();
    assert_eq!(json, serde_json::to_string(&b).unwrap());
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["per_fold"].as_array().unwrap().len(), 8);
    assert_eq!(a.folds_csv().lines().count(), 9);
}
