use tailsmooth::estimators::EstimatorKind;
use tailsmooth::montecarlo::{results_csv, run_experiment, run_experiment_cells, table1_models};
use tailsmooth::{AbiasMode, ExperimentConfig, ModelCase, ModelSpec};

fn mar_grid() -> Vec<ModelCase> {
    [0.25, 0.5, 0.75]
        .into_iter()
        .map(|c| ModelCase::new(ModelSpec::Mar1 { c }))
        .collect()
}

fn small_config(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::published_design(table1_models(), seed);
    cfg.replicas = 40;
    cfg.sample_size = 500;
    cfg.estimators = EstimatorKind::ALL.to_vec();
    cfg.models.push(ModelCase::new(ModelSpec::StoppedClock { q: 0.2 }));
    cfg
}

#[test]
fn reruns_are_byte_identical() {
    let a = results_csv(&run_experiment_cells(&small_config(17)).unwrap());
    let b = results_csv(&run_experiment_cells(&small_config(17)).unwrap());
    assert_eq!(a, b);
    let c = results_csv(&run_experiment_cells(&small_config(18)).unwrap());
    assert_ne!(a, c);
}

#[test]
fn worker_count_does_not_change_results() {
    let mut one = small_config(3);
    one.workers = Some(1);
    let mut many = small_config(3);
    many.workers = Some(5);
    assert_eq!(
        results_csv(&run_experiment_cells(&one).unwrap()),
        results_csv(&run_experiment_cells(&many).unwrap())
    );
}

#[test]
fn rmse_dominates_abias_in_both_modes() {
    for mode in [AbiasMode::AbsBias, AbiasMode::MeanAbsError] {
        let mut cfg = small_config(5);
        cfg.abias_mode = mode;
        for r in run_experiment(&cfg).unwrap() {
            assert!(r.abias >= 0.0);
            assert!(
                r.rmse >= r.abias,
                "{} {} {}: {} < {}",
                r.model,
                r.param,
                r.estimator,
                r.rmse,
                r.abias
            );
            assert!(r.mean_abs_error >= r.bias.abs() - 1e-15);
        }
    }
}

#[test]
fn doubling_length_does_not_raise_mean_rmse() {
    let mean_rmse = |seed: u64, n: usize| {
        let mut cfg = ExperimentConfig::published_design(mar_grid(), seed);
        cfg.sample_size = n;
        let results = run_experiment(&cfg).unwrap();
        results.iter().map(|r| r.rmse).sum::<f64>() / results.len() as f64
    };
    let improved = [1u64, 2, 3]
        .into_iter()
        .filter(|&seed| mean_rmse(seed, 2000) <= mean_rmse(seed, 1000))
        .count();
    assert!(improved >= 2, "only {improved} of 3 seeds improved");
}

#[test]
fn published_design_is_the_default() {
    let cfg = ExperimentConfig::published_design(mar_grid(), 42);
    assert_eq!((cfg.replicas, cfg.sample_size, cfg.quantile), (200, 1000, 0.95));
    assert_eq!(cfg.estimators, EstimatorKind::LEVEL_BASED.to_vec());
}
