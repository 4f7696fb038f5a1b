//! Series containers, probability-integral transforms and level-crossing
//! counts.
//!
//! Empirical uniformization maps observation `x_i` of a series of length `L`
//! to `r_i / (L + 1)`, where `r_i = #{j : x_j <= x_i}` is the maximum rank
//! of `x_i`. Tied observations therefore share a value, and a run of equal
//! observations never produces an upcrossing.

use crate::error::{Error, Result};

/// Where a series came from, when it was produced by a known process.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub model: String,
    pub true_lambda: Option<f64>,
}

/// An ordered block of finite observations `X_n, ..., X_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    start_index: i64,
    meta: Option<Provenance>,
}

impl TimeSeries {
    /// Builds a series starting at index 1.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_start(values, 1)
    }

    pub fn with_start(values: Vec<f64>, start_index: i64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "length {} is below the minimum of 2",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value {} at position {}",
                values[pos],
                start_index + pos as i64
            )));
        }
        Ok(Self {
            values,
            start_index,
            meta: None,
        })
    }

    pub fn with_meta(mut self, meta: Provenance) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    pub fn meta(&self) -> Option<&Provenance> {
        self.meta.as_ref()
    }

    pub fn true_lambda(&self) -> Option<f64> {
        self.meta.as_ref().and_then(|m| m.true_lambda)
    }

    /// `(index, value)` pairs in order.
    pub fn indexed(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.start_index + k as i64, v))
    }

    /// Applies `f` to every observation. Fails if `f` produces a non-finite value.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        let mut out = Self::with_start(self.values.iter().map(|&v| f(v)).collect(), self.start_index)?;
        out.meta = self.meta.clone();
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniformSource {
    TheoreticalCdf,
    EmpiricalRanks,
}

/// Probability-integral-transformed series with values in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSeries {
    values: Vec<f64>,
    source: UniformSource,
}

impl UniformSeries {
    /// Wraps values that are already on the uniform scale.
    pub fn from_values(values: Vec<f64>, source: UniformSource) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "length {} is below the minimum of 2",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::InvalidSeries(format!("uniform value {v} is outside (0, 1)")));
        }
        Ok(Self { values, source })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn source(&self) -> UniformSource {
        self.source
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelOrigin {
    Fixed,
    SampleQuantile(f64),
}

/// A high level `u` on the uniform scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    u: f64,
    origin: LevelOrigin,
}

impl Level {
    pub fn fixed(u: f64) -> Result<Self> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidLevel(u));
        }
        Ok(Self {
            u,
            origin: LevelOrigin::Fixed,
        })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn origin(&self) -> LevelOrigin {
        self.origin
    }
}

/// How an estimator should pick its level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelChoice {
    /// Order statistic of the uniformized sample, see [`sample_quantile_level`].
    Quantile(f64),
    /// Sample quantile of the empirical d.f. `r / L`, see [`ecdf_quantile_level`].
    EcdfQuantile(f64),
    /// A fixed level on the uniform scale.
    Fixed(f64),
}

impl LevelChoice {
    pub fn resolve(&self, useries: &UniformSeries) -> Result<Level> {
        match *self {
            LevelChoice::Quantile(q) => sample_quantile_level(useries, q),
            LevelChoice::EcdfQuantile(q) => ecdf_quantile_level(useries, q),
            LevelChoice::Fixed(u) => Level::fixed(u),
        }
    }
}

/// Upcrossing and exceedance counts of a level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingCounts {
    pub upcrossings: usize,
    pub exceedances: usize,
    pub level: Level,
    pub series_length: usize,
}

/// Rank-based transform `r_i / (L + 1)` with max-rank ties.
pub fn uniformize_empirical(series: &TimeSeries) -> Result<UniformSeries> {
    let values = series.values();
    if values.len() < 2 {
        return Err(Error::InvalidSeries("length below 2".into()));
    }
    let len = values.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let denom = (len + 1) as f64;
    let mut out = vec![0.0; len];
    let mut start = 0;
    while start < len {
        let mut end = start + 1;
        while end < len && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // every member of the tie group gets the largest rank in the group
        let u = end as f64 / denom;
        for &pos in &order[start..end] {
            out[pos] = u;
        }
        start = end;
    }
    Ok(UniformSeries {
        values: out,
        source: UniformSource::EmpiricalRanks,
    })
}

/// Applies a per-index distribution function, `cdf(index, x)`.
///
/// Results are clamped to `[EPSILON, 1 - EPSILON]` so they stay strictly
/// inside the unit interval.
pub fn uniformize_theoretical<F>(series: &TimeSeries, cdf: F) -> Result<UniformSeries>
where
    F: Fn(i64, f64) -> f64,
{
    let lo = f64::EPSILON;
    let hi = 1.0 - f64::EPSILON;
    let values = series
        .indexed()
        .map(|(index, x)| {
            let value = cdf(index, x);
            if !(0.0..=1.0).contains(&value) {
                Err(Error::InvalidCdf { index, value })
            } else {
                Ok(value.clamp(lo, hi))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UniformSeries {
        values,
        source: UniformSource::TheoreticalCdf,
    })
}

/// Counts exceedances `v_i > u` over all indices and upcrossings
/// `v_i <= u < v_{i+1}` over the adjacent pairs.
pub fn count_crossings(useries: &UniformSeries, level: Level) -> CrossingCounts {
    let u = level.u();
    let values = useries.values();
    let exceedances = values.iter().filter(|&&v| v > u).count();
    let upcrossings = values.windows(2).filter(|w| w[0] <= u && u < w[1]).count();
    CrossingCounts {
        upcrossings,
        exceedances,
        level,
        series_length: values.len(),
    }
}

/// Empirical `q`-quantile: the order statistic at position `ceil(q * L)`.
pub fn sample_quantile_level(useries: &UniformSeries, q: f64) -> Result<Level> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidQuantile(q));
    }
    let mut sorted = useries.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let len = sorted.len();
    // absorb representation error in products like 0.07 * 100
    let rank = ((q * len as f64) - 1e-9).ceil().max(1.0) as usize;
    let u = sorted[rank.min(len) - 1];
    Ok(Level {
        u,
        origin: LevelOrigin::SampleQuantile(q),
    })
}

/// Sample `q`-quantile of the empirical d.f. `F̂(x) = #{j : x_j <= x} / L`.
///
/// The same order statistic as [`sample_quantile_level`] is selected, so
/// exceedance, upcrossing and copula counts are identical under both rules;
/// only the numeric level changes from `r / (L + 1)` to `r / L`. The level
/// is then on the same scale as the exceedance fraction `E(u) / L`, which
/// the `LOG` and `SEC` formulas rely on. Series uniformized with a
/// theoretical d.f. use the order statistic unchanged.
///
/// Fails with `InvalidLevel` when the selected observation is the sample
/// maximum, where `F̂ = 1`.
pub fn ecdf_quantile_level(useries: &UniformSeries, q: f64) -> Result<Level> {
    let order_stat = sample_quantile_level(useries, q)?;
    let u = match useries.source() {
        UniformSource::TheoreticalCdf => order_stat.u,
        UniformSource::EmpiricalRanks => {
            let len = useries.len() as f64;
            let rank = (order_stat.u * (len + 1.0)).round();
            rank / len
        }
    };
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidLevel(u));
    }
    Ok(Level {
        u,
        origin: LevelOrigin::SampleQuantile(q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uni(values: &[f64]) -> UniformSeries {
        UniformSeries::from_values(values.to_vec(), UniformSource::EmpiricalRanks).unwrap()
    }

    fn approx_vec(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-15, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn rejects_short_and_non_finite() {
        assert!(matches!(TimeSeries::new(vec![1.0]), Err(Error::InvalidSeries(_))));
        assert!(matches!(
            TimeSeries::new(vec![1.0, f64::NAN]),
            Err(Error::InvalidSeries(_))
        ));
        assert!(TimeSeries::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(UniformSeries::from_values(vec![0.5, 1.0], UniformSource::TheoreticalCdf).is_err());
    }

    #[test]
    fn empirical_distinct_values() {
        let s = TimeSeries::new(vec![10.0, 30.0, 20.0]).unwrap();
        approx_vec(uniformize_empirical(&s).unwrap().values(), &[0.25, 0.75, 0.5]);
    }

    #[test]
    fn empirical_all_ties_share_max_rank() {
        let s = TimeSeries::new(vec![5.0, 5.0, 5.0]).unwrap();
        approx_vec(uniformize_empirical(&s).unwrap().values(), &[0.75, 0.75, 0.75]);
    }

    #[test]
    fn empirical_partial_ties() {
        let s = TimeSeries::new(vec![2.0, 7.0, 7.0, 1.0]).unwrap();
        approx_vec(
            uniformize_empirical(&s).unwrap().values(),
            &[2.0 / 5.0, 4.0 / 5.0, 4.0 / 5.0, 1.0 / 5.0],
        );
    }

    #[test]
    fn theoretical_unit_frechet_median() {
        let s = TimeSeries::new(vec![1.0 / std::f64::consts::LN_2, 1.0]).unwrap();
        let u = uniformize_theoretical(&s, |_, x| (-1.0 / x).exp()).unwrap();
        assert!((u.values()[0] - 0.5).abs() < 1e-15);
        assert!((u.values()[1] - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(u.source(), UniformSource::TheoreticalCdf);
    }

    #[test]
    fn theoretical_constant_series_is_constant() {
        let s = TimeSeries::new(vec![3.0; 6]).unwrap();
        let u = uniformize_theoretical(&s, |_, x| (-1.0 / x).exp()).unwrap();
        assert!(u.values().iter().all(|&v| v == u.values()[0]));
    }

    #[test]
    fn theoretical_pareto3_median() {
        let s = TimeSeries::new(vec![1.0, 1.0]).unwrap();
        let (sigma, alpha) = (1.0f64, 1.0f64);
        let u = uniformize_theoretical(&s, |_, x| 1.0 - 1.0 / (1.0 + (x / sigma).powf(alpha))).unwrap();
        assert_eq!(u.values()[0], 0.5);
    }

    #[test]
    fn theoretical_clamps_and_rejects() {
        let s = TimeSeries::new(vec![1.0, 2.0]).unwrap();
        let u = uniformize_theoretical(&s, |i, _| if i == 1 { 0.0 } else { 1.0 }).unwrap();
        assert!(u.values()[0] > 0.0 && u.values()[1] < 1.0);
        let err = uniformize_theoretical(&s, |_, _| 1.5).unwrap_err();
        assert!(matches!(err, Error::InvalidCdf { index: 1, .. }));
        assert!(uniformize_theoretical(&s, |_, _| f64::NAN).is_err());
    }

    #[test]
    fn crossing_counts_hand_example() {
        let c = count_crossings(&uni(&[0.1, 0.96, 0.97, 0.2, 0.99]), Level::fixed(0.95).unwrap());
        assert_eq!((c.upcrossings, c.exceedances, c.series_length), (2, 3, 5));
    }

    #[test]
    fn crossing_counts_extremes() {
        let level = Level::fixed(0.95).unwrap();
        let c = count_crossings(&uni(&[0.1, 0.5, 0.95]), level);
        assert_eq!((c.upcrossings, c.exceedances), (0, 0));
        let c = count_crossings(&uni(&[0.96, 0.97, 0.99, 0.98]), level);
        assert_eq!((c.upcrossings, c.exceedances), (0, 4));
    }

    #[test]
    fn quantile_on_rank_grid() {
        let grid: Vec<f64> = (1..=100).rev().map(|r| r as f64 / 101.0).collect();
        let level = sample_quantile_level(&uni(&grid), 0.95).unwrap();
        assert_eq!(level.u(), 95.0 / 101.0);
        assert_eq!(level.origin(), LevelOrigin::SampleQuantile(0.95));
    }

    #[test]
    fn quantile_median_and_constant() {
        assert_eq!(sample_quantile_level(&uni(&[0.75, 0.25, 0.5]), 0.5).unwrap().u(), 0.5);
        assert_eq!(sample_quantile_level(&uni(&[0.3; 7]), 0.95).unwrap().u(), 0.3);
    }

    #[test]
    fn ecdf_quantile_rescales_rank() {
        let s = TimeSeries::new((1..=1000).map(f64::from).collect()).unwrap();
        let us = uniformize_empirical(&s).unwrap();
        let order = sample_quantile_level(&us, 0.95).unwrap();
        let ecdf = ecdf_quantile_level(&us, 0.95).unwrap();
        assert_eq!(order.u(), 950.0 / 1001.0);
        assert_eq!(ecdf.u(), 0.95);
        let a = count_crossings(&us, order);
        let b = count_crossings(&us, ecdf);
        assert_eq!((a.upcrossings, a.exceedances), (b.upcrossings, b.exceedances));
        assert_eq!(b.exceedances, 50);
    }

    #[test]
    fn ecdf_quantile_with_ties_and_at_maximum() {
        let s = TimeSeries::new(vec![1.0, 2.0, 2.0, 2.0, 3.0]).unwrap();
        let us = uniformize_empirical(&s).unwrap();
        // 2nd order statistic is a tied 2 with max rank 4
        assert_eq!(ecdf_quantile_level(&us, 0.4).unwrap().u(), 0.8);
        assert!(matches!(ecdf_quantile_level(&us, 0.95), Err(Error::InvalidLevel(_))));
        let theo = UniformSeries::from_values(vec![0.2, 0.6, 0.4], UniformSource::TheoreticalCdf).unwrap();
        assert_eq!(ecdf_quantile_level(&theo, 0.5).unwrap().u(), 0.4);
    }

    #[test]
    fn quantile_rejects_out_of_range() {
        let s = uni(&[0.2, 0.4]);
        for q in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(sample_quantile_level(&s, q), Err(Error::InvalidQuantile(_))));
        }
        assert!(Level::fixed(1.0).is_err());
        assert!(Level::fixed(0.0).is_err());
    }

    #[test]
    fn ties_never_upcross() {
        let s = TimeSeries::new(vec![1.0, 4.0, 4.0, 4.0, 2.0, 4.0]).unwrap();
        let u = uniformize_empirical(&s).unwrap();
        let c = count_crossings(&u, Level::fixed(0.5).unwrap());
        assert_eq!((c.upcrossings, c.exceedances), (2, 4));
    }

    fn naive_counts(values: &[f64], u: f64) -> (usize, usize) {
        let mut up = 0;
        let mut exc = 0;
        for i in 0..values.len() {
            if values[i] > u {
                exc += 1;
            }
            if i + 1 < values.len() && values[i] <= u && values[i + 1] > u {
                up += 1;
            }
        }
        (up, exc)
    }

    fn brute_force_ranks(values: &[f64]) -> Vec<f64> {
        let denom = (values.len() + 1) as f64;
        values
            .iter()
            .map(|x| values.iter().filter(|y| *y <= x).count() as f64 / denom)
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ranks_match_brute_force(raw in prop::collection::vec(-20i32..20, 2..60)) {
            let values: Vec<f64> = raw.iter().map(|&v| v as f64 * 0.5).collect();
            let s = TimeSeries::new(values.clone()).unwrap();
            prop_assert_eq!(uniformize_empirical(&s).unwrap().values().to_vec(), brute_force_ranks(&values));
        }

        #[test]
        fn rank_invariance_under_increasing_maps(raw in prop::collection::vec(-50i32..50, 2..80)) {
            let values: Vec<f64> = raw.iter().map(|&v| v as f64 / 10.0).collect();
            let s = TimeSeries::new(values).unwrap();
            let t = s.map(|x| x.exp() * 3.0 + x * x * x).unwrap();
            prop_assert_eq!(uniformize_empirical(&s).unwrap(), uniformize_empirical(&t).unwrap());
        }

        #[test]
        fn ecdf_and_order_statistic_levels_count_alike(
            raw in prop::collection::vec(-30i32..30, 2..200),
            q in 0.01f64..0.99,
        ) {
            let s = TimeSeries::new(raw.iter().map(|&v| f64::from(v)).collect()).unwrap();
            let us = uniformize_empirical(&s).unwrap();
            let order = sample_quantile_level(&us, q).unwrap();
            if let Ok(ecdf) = ecdf_quantile_level(&us, q) {
                let a = count_crossings(&us, order);
                let b = count_crossings(&us, ecdf);
                prop_assert_eq!((a.upcrossings, a.exceedances), (b.upcrossings, b.exceedances));
            } else {
                prop_assert_eq!(count_crossings(&us, order).exceedances, 0);
            }
        }

        #[test]
        fn counts_agree_with_naive_loop(
            values in prop::collection::vec(0.001f64..0.999, 2..200),
            u in 0.01f64..0.99,
        ) {
            let c = count_crossings(&uni(&values), Level::fixed(u).unwrap());
            prop_assert_eq!((c.upcrossings, c.exceedances), naive_counts(&values, u));
            prop_assert!(c.upcrossings <= c.exceedances);
        }
    }
}
