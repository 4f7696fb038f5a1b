//! Closed-form smoothness and tail-dependence coefficients.
//!
//! For a block `n..=m` with neighbourhoods `V(i) = {i-1, i+1}` the
//! smoothness coefficient is the average of the pairwise upper tail
//! dependence coefficients
//!
//! ```text
//! S_{n,m} = 1 / (2 (m - n + 1)) * Σ_{i=n}^{m} Σ_{j ∈ V(i)} λ(j|i)
//! ```
//!
//! so a stationary sequence has `S_{n,m} = λ` for every block. The r-factor
//! and stopped-clock models have closed forms for `λ(j|i)`; these are
//! checked against [`numeric_lambda_limit`], which evaluates
//! `2 - (1 - C(u,u)) / (1 - u)` on a grid approaching one.

use crate::error::{Error, Result};
use crate::models::RFactor;

/// Source of pairwise coefficients `λ(j|i)`.
pub trait PairwiseLambda {
    fn lambda(&self, i: usize, j: usize) -> Option<f64>;
}

impl<F> PairwiseLambda for F
where
    F: Fn(usize, usize) -> Option<f64>,
{
    fn lambda(&self, i: usize, j: usize) -> Option<f64> {
        self(i, j)
    }
}

/// The same coefficient for every pair, as in a stationary sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantLambda(pub f64);

impl PairwiseLambda for ConstantLambda {
    fn lambda(&self, _: usize, _: usize) -> Option<f64> {
        Some(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessValue {
    pub s: f64,
    pub n: usize,
    pub m: usize,
}

fn check_block(n: usize, m: usize) -> Result<()> {
    if n == 0 || n >= m {
        return Err(Error::InvalidBlock { n, m });
    }
    Ok(())
}

/// Average of `λ(i-1|i)` and `λ(i+1|i)` over `i = n..=m`.
///
/// The provider must cover the boundary neighbours `n - 1` and `m + 1`.
pub fn smoothness_from_pairwise<P: PairwiseLambda + ?Sized>(lam: &P, n: usize, m: usize) -> Result<SmoothnessValue> {
    check_block(n, m)?;
    let mut total = 0.0;
    for i in n..=m {
        for j in [i - 1, i + 1] {
            let value = lam.lambda(i, j).ok_or(Error::MissingPair { i, j })?;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidLambda { i, j, value });
            }
            total += value;
        }
    }
    let s = total / (2 * (m - n + 1)) as f64;
    Ok(SmoothnessValue {
        s: s.clamp(0.0, 1.0),
        n,
        m,
    })
}

/// Normalized factor weights `b_{s,n} = a_{s,n}^α / Σ_s a_{s,n}^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWeights {
    factors: usize,
    data: Vec<f64>,
}

impl SpectralWeights {
    pub fn from_model(model: &RFactor) -> Self {
        let factors = model.weights.factors();
        let mut data = Vec::with_capacity(factors * model.weights.times());
        for n in 1..=model.weights.times() {
            let powered: Vec<f64> = model
                .weights
                .column(n)
                .unwrap()
                .iter()
                .map(|a| a.powf(model.alpha))
                .collect();
            let total: f64 = powered.iter().sum();
            data.extend(powered.iter().map(|p| p / total));
        }
        Self { factors, data }
    }

    /// Builds directly from probability-vector columns (time points).
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let factors = columns.first().map(Vec::len).unwrap_or(0);
        if factors == 0 {
            return Err(Error::InvalidWeights("no spectral columns".into()));
        }
        let mut data = Vec::with_capacity(factors * columns.len());
        for (k, col) in columns.iter().enumerate() {
            if col.len() != factors {
                return Err(Error::InvalidWeights(format!(
                    "column {} has {} entries, expected {factors}",
                    k + 1,
                    col.len()
                )));
            }
            let total: f64 = col.iter().sum();
            if col.iter().any(|b| b.is_nan() || *b < 0.0) || (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidWeights(format!(
                    "column {} is not a probability vector",
                    k + 1
                )));
            }
            data.extend_from_slice(col);
        }
        Ok(Self { factors, data })
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn times(&self) -> usize {
        self.data.len() / self.factors
    }

    pub fn column(&self, n: usize) -> Result<&[f64]> {
        if n == 0 || n > self.times() {
            return Err(Error::Index {
                column: n,
                available: self.times(),
            });
        }
        Ok(&self.data[(n - 1) * self.factors..n * self.factors])
    }
}

impl PairwiseLambda for SpectralWeights {
    fn lambda(&self, i: usize, j: usize) -> Option<f64> {
        rfactor_pairwise_lambda(self, i, j).ok()
    }
}

fn overlap_sum(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.max(*y)).sum()
}

/// `λ(j|i) = 2 - Σ_s max(b_{s,i}, b_{s,j})`.
pub fn rfactor_pairwise_lambda(weights: &SpectralWeights, i: usize, j: usize) -> Result<f64> {
    let bi = weights.column(i)?;
    let bj = weights.column(j)?;
    Ok((2.0 - overlap_sum(bi, bj)).clamp(0.0, 1.0))
}

/// Closed form
/// `2 - 1/(2(m-n+1)) Σ_i Σ_s (max(b_{s,i-1}, b_{s,i}) + max(b_{s,i}, b_{s,i+1}))`.
///
/// Columns `n - 1` through `m + 1` must exist.
pub fn rfactor_smoothness(weights: &SpectralWeights, n: usize, m: usize) -> Result<SmoothnessValue> {
    check_block(n, m)?;
    weights.column(n - 1)?;
    weights.column(m + 1)?;
    let mut total = 0.0;
    for i in n..=m {
        let here = weights.column(i)?;
        total += overlap_sum(weights.column(i - 1)?, here);
        total += overlap_sum(here, weights.column(i + 1)?);
    }
    let s = 2.0 - total / (2 * (m - n + 1)) as f64;
    Ok(SmoothnessValue {
        s: s.clamp(0.0, 1.0),
        n,
        m,
    })
}

fn check_stop_probability(q: f64) -> Result<()> {
    if (0.0..0.5).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "q",
            value: q,
            reason: "must lie in [0, 1/2)",
        })
    }
}

/// `λ(i+1|i) = p_{i,i+1}(1,0)`, which is `q` for the stationary
/// short-failures chain.
pub fn stopped_clock_pairwise_lambda(q: f64) -> Result<f64> {
    check_stop_probability(q)?;
    Ok(q)
}

/// `S_{n,m} = 1/(2(m-n+1)) Σ_{i=n}^{m} (p_i(0) + p_{i+1}(0))` for per-index
/// failure probabilities `p_i(0)`.
pub fn stopped_clock_smoothness<F>(stop_probability: F, n: usize, m: usize) -> Result<SmoothnessValue>
where
    F: Fn(usize) -> f64,
{
    check_block(n, m)?;
    let mut total = 0.0;
    for i in n..=m {
        for k in [i, i + 1] {
            let p = stop_probability(k);
            check_stop_probability(p)?;
            total += p;
        }
    }
    Ok(SmoothnessValue {
        s: (total / (2 * (m - n + 1)) as f64).clamp(0.0, 1.0),
        n,
        m,
    })
}

/// Result of [`numeric_lambda_limit`].
#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub value: f64,
    /// Difference between the last two extrapolated values.
    pub spread: f64,
    /// `(u, 2 - (1 - C(u,u)) / (1 - u))` at every grid point.
    pub raw: Vec<(f64, f64)>,
}

/// `u = 1 - 10^{-k}` for `k = 2..=8`.
pub fn default_u_grid() -> Vec<f64> {
    (2..=8).map(|k| 1.0 - 10f64.powi(-k)).collect()
}

pub const DEFAULT_LIMIT_TOLERANCE: f64 = 1e-6;

/// Limit of `2 - (1 - C(u,u)) / (1 - u)` as `u → 1`, where `joint_tail(u)`
/// is the exact `P(F_i(X_i) <= u, F_j(X_j) <= u)`.
///
/// Consecutive grid values are extrapolated linearly in `1 - u` to `u = 1`
/// (one Richardson step); the reported spread is the distance between the
/// last two extrapolants.
pub fn numeric_lambda_limit<F>(joint_tail: F, u_grid: &[f64]) -> Result<LimitEstimate>
where
    F: Fn(f64) -> f64,
{
    numeric_lambda_limit_with_tolerance(joint_tail, u_grid, DEFAULT_LIMIT_TOLERANCE)
}

pub fn numeric_lambda_limit_with_tolerance<F>(joint_tail: F, u_grid: &[f64], tolerance: f64) -> Result<LimitEstimate>
where
    F: Fn(f64) -> f64,
{
    if u_grid.len() < 3 {
        return Err(Error::Config("limit grid needs at least three points".into()));
    }
    if u_grid
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        || u_grid.iter().any(|u| !(*u > 0.0 && *u < 1.0))
    {
        return Err(Error::Config("limit grid must increase strictly inside (0, 1)".into()));
    }
    let raw: Vec<(f64, f64)> = u_grid
        .iter()
        .map(|&u| (u, 2.0 - (1.0 - joint_tail(u)) / (1.0 - u)))
        .collect();
    let extrapolated: Vec<f64> = raw
        .windows(2)
        .map(|w| {
            let (h0, g0) = (1.0 - w[0].0, w[0].1);
            let (h1, g1) = (1.0 - w[1].0, w[1].1);
            (h0 * g1 - h1 * g0) / (h0 - h1)
        })
        .collect();
    let last = extrapolated[extrapolated.len() - 1];
    let prev = extrapolated[extrapolated.len() - 2];
    let spread = (last - prev).abs();
    if !last.is_finite() || spread.is_nan() || spread > tolerance {
        return Err(Error::NoLimit { spread, tolerance });
    }
    Ok(LimitEstimate {
        value: last,
        spread,
        raw,
    })
}
