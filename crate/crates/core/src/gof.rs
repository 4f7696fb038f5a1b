//! Goodness-of-fit helpers used to check samplers against their marginals.

/// One-sample Kolmogorov–Smirnov statistic `sup_x |F_n(x) - F(x)|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            let above = (k + 1) as f64 / n - f;
            let below = f - k as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_grid_has_small_statistic() {
        let n = 1000;
        let grid: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&grid, |x| x);
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn shifted_sample_is_detected() {
        let grid: Vec<f64> = (0..1000).map(|k| 0.2 + 0.8 * k as f64 / 1000.0).collect();
        assert!(ks_statistic(&grid, |x| x.clamp(0.0, 1.0)) > 0.19);
    }
}
