//! Estimators of the lag-one tail dependence coefficient.
//!
//! All three level-based estimators work on the rank-uniformized series and
//! a single high level `u` (by default an empirical quantile):
//!
//! ```text
//! FF  = 1 - U(u) / E(u)
//! LOG = 2 - ln C_n(u,u) / ln u
//! SEC = 2 - (1 - C_n(u,u)) / (1 - u)
//! ```
//!
//! where `U` counts upcrossings, `E` exceedances and `C_n(u,u)` is the
//! share of adjacent pairs with both values at or below `u`. The tie rate
//! is the share of adjacent pairs with identical raw values.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::series::{
    count_crossings, uniformize_empirical, CrossingCounts, Level, LevelChoice, TimeSeries, UniformSeries,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    Ff,
    Log,
    Sec,
    Tie,
}

impl EstimatorKind {
    pub const LEVEL_BASED: [EstimatorKind; 3] = [EstimatorKind::Ff, EstimatorKind::Log, EstimatorKind::Sec];
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::Ff,
        EstimatorKind::Log,
        EstimatorKind::Sec,
        EstimatorKind::Tie,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Ff => "FF",
            EstimatorKind::Log => "LOG",
            EstimatorKind::Sec => "SEC",
            EstimatorKind::Tie => "TIE",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ff" => Ok(EstimatorKind::Ff),
            "log" => Ok(EstimatorKind::Log),
            "sec" => Ok(EstimatorKind::Sec),
            "tie" => Ok(EstimatorKind::Tie),
            other => Err(Error::Config(format!(
                "unknown estimator `{other}` (expected ff, log, sec or tie)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimator: EstimatorKind,
    pub value: f64,
    /// `None` for the tie rate, which does not use a level.
    pub level: Option<Level>,
    pub counts: Option<CrossingCounts>,
    pub copula_diag: Option<f64>,
    pub sample_size: usize,
}

/// `1 - U(u)/E(u)` on an already uniformized series.
pub fn lambda_ff_uniform(useries: &UniformSeries, level: Level) -> Result<EstimateReport> {
    let counts = count_crossings(useries, level);
    if counts.exceedances == 0 {
        return Err(Error::NoExceedances { u: level.u() });
    }
    Ok(EstimateReport {
        estimator: EstimatorKind::Ff,
        value: 1.0 - counts.upcrossings as f64 / counts.exceedances as f64,
        level: Some(level),
        counts: Some(counts),
        copula_diag: None,
        sample_size: useries.len(),
    })
}

pub fn lambda_ff(series: &TimeSeries, choice: LevelChoice) -> Result<EstimateReport> {
    let useries = uniformize_empirical(series)?;
    let level = choice.resolve(&useries)?;
    lambda_ff_uniform(&useries, level)
}

/// `C_n(u,u)` over the `L - 1` adjacent pairs of a uniformized series.
pub fn empirical_copula_diag_uniform(useries: &UniformSeries, level: Level) -> f64 {
    let u = level.u();
    let values = useries.values();
    let below = values.windows(2).filter(|w| w[0] <= u && w[1] <= u).count();
    below as f64 / (values.len() - 1) as f64
}

pub fn empirical_copula_diag(series: &TimeSeries, level: Level) -> Result<f64> {
    Ok(empirical_copula_diag_uniform(&uniformize_empirical(series)?, level))
}

/// `2 - ln C / ln u`.
pub fn lambda_log_from_diag(copula_diag: f64, u: f64) -> Result<f64> {
    if copula_diag.is_nan() || copula_diag <= 0.0 {
        return Err(Error::DegenerateCopula { u });
    }
    Ok(2.0 - copula_diag.ln() / u.ln())
}

/// `2 - (1 - C) / (1 - u)`, reported without clamping.
pub fn lambda_sec_from_diag(copula_diag: f64, u: f64) -> f64 {
    2.0 - (1.0 - copula_diag) / (1.0 - u)
}

pub fn lambda_log_uniform(useries: &UniformSeries, level: Level) -> Result<EstimateReport> {
    let diag = empirical_copula_diag_uniform(useries, level);
    Ok(EstimateReport {
        estimator: EstimatorKind::Log,
        value: lambda_log_from_diag(diag, level.u())?,
        level: Some(level),
        counts: Some(count_crossings(useries, level)),
        copula_diag: Some(diag),
        sample_size: useries.len(),
    })
}

pub fn lambda_log(series: &TimeSeries, choice: LevelChoice) -> Result<EstimateReport> {
    let useries = uniformize_empirical(series)?;
    let level = choice.resolve(&useries)?;
    lambda_log_uniform(&useries, level)
}

pub fn lambda_sec_uniform(useries: &UniformSeries, level: Level) -> Result<EstimateReport> {
    let diag = empirical_copula_diag_uniform(useries, level);
    Ok(EstimateReport {
        estimator: EstimatorKind::Sec,
        value: lambda_sec_from_diag(diag, level.u()),
        level: Some(level),
        counts: Some(count_crossings(useries, level)),
        copula_diag: Some(diag),
        sample_size: useries.len(),
    })
}

pub fn lambda_sec(series: &TimeSeries, choice: LevelChoice) -> Result<EstimateReport> {
    let useries = uniformize_empirical(series)?;
    let level = choice.resolve(&useries)?;
    lambda_sec_uniform(&useries, level)
}

/// Share of adjacent pairs with exactly equal raw values.
pub fn tie_rate(series: &TimeSeries) -> EstimateReport {
    let values = series.values();
    let ties = values.windows(2).filter(|w| w[0] == w[1]).count();
    EstimateReport {
        estimator: EstimatorKind::Tie,
        value: ties as f64 / (values.len() - 1) as f64,
        level: None,
        counts: None,
        copula_diag: None,
        sample_size: values.len(),
    }
}

/// Runs several estimators on one series, uniformizing it once.
///
/// Each entry is independent: an undefined estimate does not prevent the
/// others from being computed.
pub fn estimate_many(
    series: &TimeSeries,
    choice: LevelChoice,
    kinds: &[EstimatorKind],
) -> Result<Vec<(EstimatorKind, Result<EstimateReport>)>> {
    let useries = uniformize_empirical(series)?;
    let level = choice.resolve(&useries)?;
    Ok(kinds
        .iter()
        .map(|&kind| {
            let report = match kind {
                EstimatorKind::Ff => lambda_ff_uniform(&useries, level),
                EstimatorKind::Log => lambda_log_uniform(&useries, level),
                EstimatorKind::Sec => lambda_sec_uniform(&useries, level),
                EstimatorKind::Tie => Ok(tie_rate(series)),
            };
            (kind, report)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::UniformSource;
    use proptest::prelude::*;

    fn uni(values: &[f64]) -> UniformSeries {
        UniformSeries::from_values(values.to_vec(), UniformSource::EmpiricalRanks).unwrap()
    }

    fn level(u: f64) -> Level {
        Level::fixed(u).unwrap()
    }

    #[test]
    fn ff_hand_example() {
        let r = lambda_ff_uniform(&uni(&[0.1, 0.96, 0.97, 0.2, 0.99]), level(0.95)).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        let counts = r.counts.unwrap();
        assert_eq!((counts.upcrossings, counts.exceedances), (2, 3));
    }

    #[test]
    fn ff_constant_series_is_one() {
        let s = TimeSeries::new(vec![4.2; 10]).unwrap();
        let r = lambda_ff(&s, LevelChoice::Fixed(0.5)).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.counts.unwrap().exceedances, 10);
        assert_eq!(tie_rate(&s).value, 1.0);
    }

    #[test]
    fn ff_without_exceedances_is_an_error() {
        let s = TimeSeries::new(vec![4.2; 10]).unwrap();
        // the 0.95 sample quantile equals the shared value, so nothing exceeds it
        assert!(matches!(
            lambda_ff(&s, LevelChoice::Quantile(0.95)),
            Err(Error::NoExceedances { .. })
        ));
    }

    #[test]
    fn ff_independent_uniforms_near_one_minus_u() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let values: Vec<f64> = (0..400_000).map(|_| rng.gen::<f64>()).collect();
        let s = TimeSeries::new(values).unwrap();
        let r = lambda_ff(&s, LevelChoice::Fixed(0.95)).unwrap();
        assert!((r.value - 0.05).abs() < 0.01, "{}", r.value);
    }

    #[test]
    fn copula_diag_examples() {
        assert_eq!(empirical_copula_diag_uniform(&uni(&[0.2, 0.3, 0.4]), level(0.95)), 1.0);
        assert_eq!(
            empirical_copula_diag_uniform(&uni(&[0.96, 0.97, 0.99]), level(0.95)),
            0.0
        );
        assert_eq!(empirical_copula_diag_uniform(&uni(&[0.2, 0.98, 0.4]), level(0.95)), 0.0);
        assert_eq!(empirical_copula_diag_uniform(&uni(&[0.2, 0.4, 0.98]), level(0.95)), 0.5);
    }

    #[test]
    fn log_formula() {
        let u: f64 = 0.95;
        assert!((lambda_log_from_diag(u, u).unwrap() - 1.0).abs() < 1e-15);
        assert!(lambda_log_from_diag(u * u, u).unwrap().abs() < 1e-14);
        assert!((lambda_log_from_diag(u.powf(1.3), u).unwrap() - 0.7).abs() < 1e-14);
        assert!(matches!(
            lambda_log_from_diag(0.0, u),
            Err(Error::DegenerateCopula { .. })
        ));
        assert!(matches!(
            lambda_log_uniform(&uni(&[0.96, 0.97, 0.99]), level(0.95)),
            Err(Error::DegenerateCopula { .. })
        ));
    }

    #[test]
    fn sec_formula() {
        let u: f64 = 0.95;
        assert!((lambda_sec_from_diag(u, u) - 1.0).abs() < 1e-14);
        assert!((lambda_sec_from_diag(u * u, u) - 0.05).abs() < 1e-14);
        for u in [0.6, 0.9, 0.99] {
            assert!(lambda_sec_from_diag(2.0 * u - 1.0, u).abs() < 1e-12);
        }
        // not clamped
        assert!(lambda_sec_from_diag(0.0, 0.95) < 0.0);
    }

    #[test]
    fn tie_rate_examples() {
        let (y1, y3, y4) = (1.5, 0.7, 2.2);
        let s = TimeSeries::new(vec![y1, y1, y3, y4, y4]).unwrap();
        assert_eq!(tie_rate(&s).value, 0.5);
        let inc = TimeSeries::new((0..20).map(f64::from).collect()).unwrap();
        assert_eq!(tie_rate(&inc).value, 0.0);
        assert!(tie_rate(&s).level.is_none());
    }

    #[test]
    fn estimate_many_reports_each_kind() {
        let s = TimeSeries::new(vec![1.0, 2.0, 5.0, 3.0, 4.0, 8.0, 6.0, 7.0]).unwrap();
        let all = estimate_many(&s, LevelChoice::Quantile(0.5), &EstimatorKind::ALL).unwrap();
        let kinds: Vec<_> = all.iter().map(|(k, _)| *k).collect();
        assert_eq!(kinds, EstimatorKind::ALL.to_vec());
        assert!(all.iter().all(|(_, r)| r.is_ok()));
        let ff = all[0].1.as_ref().unwrap();
        assert_eq!(ff.value, lambda_ff(&s, LevelChoice::Quantile(0.5)).unwrap().value);
    }

    #[test]
    fn parse_kind() {
        assert_eq!("ff".parse::<EstimatorKind>().unwrap(), EstimatorKind::Ff);
        assert_eq!(" SEC ".parse::<EstimatorKind>().unwrap(), EstimatorKind::Sec);
        assert!("mle".parse::<EstimatorKind>().is_err());
    }

    proptest! {
        #[test]
        fn ff_in_unit_interval(raw in prop::collection::vec(-30i32..30, 2..120), q in 0.05f64..0.95) {
            let s = TimeSeries::new(raw.iter().map(|&v| v as f64).collect()).unwrap();
            if let Ok(r) = lambda_ff(&s, LevelChoice::Quantile(q)) {
                prop_assert!((0.0..=1.0).contains(&r.value));
            }
        }

        #[test]
        fn estimators_invariant_under_increasing_maps(
            raw in prop::collection::vec(-40i32..40, 3..150),
            q in 0.3f64..0.95,
        ) {
            let s = TimeSeries::new(raw.iter().map(|&v| v as f64 / 4.0).collect()).unwrap();
            let t = s.map(|x| 2.0 * x + x.exp()).unwrap();
            let a = estimate_many(&s, LevelChoice::Quantile(q), &EstimatorKind::ALL).unwrap();
            let b = estimate_many(&t, LevelChoice::Quantile(q), &EstimatorKind::ALL).unwrap();
            for ((_, ra), (_, rb)) in a.iter().zip(&b) {
                prop_assert_eq!(ra, rb);
            }
        }

        #[test]
        fn log_never_exceeds_two(values in prop::collection::vec(0.01f64..0.99, 3..100), u in 0.05f64..0.95) {
            let us = uni(&values);
            if let Ok(r) = lambda_log_uniform(&us, level(u)) {
                prop_assert!(r.value <= 2.0);
            }
        }
    }
}
