use rand::Rng;
use tailsmooth::theory::{
    default_u_grid, numeric_lambda_limit, rfactor_pairwise_lambda, rfactor_smoothness, smoothness_from_pairwise,
    stopped_clock_smoothness,
};
use tailsmooth::{RFactor, Seed, SpectralWeights, WeightMatrix};

fn random_rfactor<R: Rng>(rng: &mut R, factors: usize, times: usize) -> RFactor {
    let mut rows: Vec<Vec<f64>> = (0..factors)
        .map(|_| {
            (0..times)
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        0.0
                    } else {
                        rng.gen_range(0.05..3.0)
                    }
                })
                .collect()
        })
        .collect();
    // every column needs some mass
    for n in 0..times {
        if rows.iter().all(|r| r[n] == 0.0) {
            rows[0][n] = 1.0;
        }
    }
    RFactor::new(rng.gen_range(0.5..3.0), WeightMatrix::from_rows(rows).unwrap()).unwrap()
}

#[test]
fn closed_form_matches_numeric_limit_of_joint_df() {
    let mut rng = Seed::new(2024, 0).rng();
    let grid = default_u_grid();
    for case in 0..50 {
        let factors = rng.gen_range(1..7);
        let rf = random_rfactor(&mut rng, factors, 2);
        let w = SpectralWeights::from_model(&rf);
        let closed = rfactor_pairwise_lambda(&w, 1, 2).unwrap();
        let tail = |u: f64| {
            let x1 = rf.marginal_quantile(1, u).unwrap();
            let x2 = rf.marginal_quantile(2, u).unwrap();
            rf.joint_cdf(1, 2, x1, x2).unwrap()
        };
        let numeric = numeric_lambda_limit(tail, &grid).unwrap();
        assert!(
            (closed - numeric.value).abs() < 1e-3,
            "case {case}: closed {closed}, numeric {}",
            numeric.value
        );
        let reverse = rfactor_pairwise_lambda(&w, 2, 1).unwrap();
        assert_eq!(closed, reverse);
    }
}

#[test]
fn closed_form_smoothness_matches_pairwise_average() {
    let mut rng = Seed::new(7, 0).rng();
    for case in 0..100 {
        let times = rng.gen_range(4..15);
        let factors = rng.gen_range(1..8);
        let rf = random_rfactor(&mut rng, factors, times);
        let w = SpectralWeights::from_model(&rf);
        let n = rng.gen_range(2..times - 1);
        let m = rng.gen_range(n + 1..times);
        let closed = rfactor_smoothness(&w, n, m).unwrap().s;
        let averaged = smoothness_from_pairwise(&w, n, m).unwrap().s;
        assert!((closed - averaged).abs() < 1e-12, "case {case}: {closed} vs {averaged}");
    }
}

#[test]
fn totally_dependent_special_cases() {
    let mut rng = Seed::new(1, 0).rng();
    // identical columns
    let col: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..2.0)).collect();
    let rows: Vec<Vec<f64>> = col.iter().map(|&a| vec![a; 8]).collect();
    let rf = RFactor::new(1.3, WeightMatrix::from_rows(rows).unwrap()).unwrap();
    assert!((rfactor_smoothness(&SpectralWeights::from_model(&rf), 2, 7).unwrap().s - 1.0).abs() < 1e-12);

    // equal factor weights within each column, varying over time
    let scale: Vec<f64> = (0..8).map(|_| rng.gen_range(0.1..5.0)).collect();
    let rows: Vec<Vec<f64>> = (0..5).map(|_| scale.clone()).collect();
    let rf = RFactor::new(0.8, WeightMatrix::from_rows(rows).unwrap()).unwrap();
    assert!((rfactor_smoothness(&SpectralWeights::from_model(&rf), 2, 7).unwrap().s - 1.0).abs() < 1e-12);

    // a single factor
    let rows = vec![scale];
    let rf = RFactor::new(2.0, WeightMatrix::from_rows(rows).unwrap()).unwrap();
    assert_eq!(
        rfactor_smoothness(&SpectralWeights::from_model(&rf), 2, 7).unwrap().s,
        1.0
    );
}

#[test]
fn disjoint_factors_give_zero() {
    let w = SpectralWeights::from_columns(vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![1.0, 0.0, 0.0],
    ])
    .unwrap();
    assert_eq!(rfactor_smoothness(&w, 2, 3).unwrap().s, 0.0);
}

#[test]
fn stopped_clock_constant_q() {
    for q in [0.0, 0.1, 0.3, 0.49] {
        let s = stopped_clock_smoothness(|_| q, 1, 20).unwrap().s;
        assert!((s - q).abs() < 1e-15);
    }
    let grid = default_u_grid();
    let limit = numeric_lambda_limit(|u| 0.3 * u + 0.7 * u * u, &grid).unwrap();
    assert!((limit.value - 0.3).abs() < 1e-6);
}
