//! Seeded exact samplers for the five generating processes.
//!
//! | model           | recursion                                              | marginal            | λ            |
//! |-----------------|--------------------------------------------------------|---------------------|--------------|
//! | MAR(1)          | `X_n = max(c X_{n-1}, (1-c) Z_n)`                       | unit Fréchet        | `c`          |
//! | MMA(1)          | `X_n = max(c Z_n, (1-c) Z_{n-1})`                       | unit Fréchet        | `min(c,1-c)` |
//! | YARP(III)(1)    | `X_n = min(p^{-1/α} X_{n-1}, ε_n / (1-U_n))`            | Pareto(III)(0,σ,α)  | `p`          |
//! | r-factor        | `X_n = max_s a_{s,n}^α Z_s^α`                           | `exp(-Σ_s a_{s,n}^α / x)` | per pair |
//! | stopped clock   | `X_n = X_{n-1}` if `Z_n = 0`, else `Y_n`                | unit Fréchet        | `q`          |
//!
//! Every sampler draws from a private ChaCha8 stream selected by a [`Seed`].
//! MAR(1) and YARP(1) start from their stationary law, so no burn-in is used.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::series::{Provenance, TimeSeries};

/// Identifies one reproducible random stream.
///
/// The generator for `(master, replica)` is ChaCha8 keyed by
/// `seed_from_u64(master)` with its stream counter set to `replica`, so
/// replica streams are disjoint and do not depend on scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub master: u64,
    pub replica: u64,
}

impl Seed {
    pub fn new(master: u64, replica: u64) -> Self {
        Self { master, replica }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.replica);
        rng
    }
}

/// Inverse transform of the unit Fréchet d.f. `exp(-1/x)`.
pub fn unit_frechet_from_uniform(u: f64) -> f64 {
    -1.0 / u.ln()
}

pub fn sample_unit_frechet<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    unit_frechet_from_uniform(rng.sample(Open01))
}

pub fn unit_frechet_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Inverse transform of Pareto(III)(0, σ, α): `σ (v / (1 - v))^{1/α}`.
pub fn pareto3_from_uniform(v: f64, sigma: f64, alpha: f64) -> f64 {
    sigma * (v / (1.0 - v)).powf(alpha.recip())
}

pub fn pareto3_cdf(x: f64, sigma: f64, alpha: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - 1.0 / (1.0 + (x / sigma).powf(alpha))
    }
}

pub fn mar1_step(c: f64, prev: f64, innovation: f64) -> f64 {
    (c * prev).max((1.0 - c) * innovation)
}

pub fn mma1_step(c: f64, current: f64, previous: f64) -> f64 {
    (c * current).max((1.0 - c) * previous)
}

/// One YARP(1) step. `hold = true` is `U_n = 1`, where the innovation term
/// is `ε_n / 0 = +∞` and the minimum is the scaled previous value.
pub fn yarp1_step(p: f64, alpha: f64, prev: f64, hold: bool, innovation: f64) -> f64 {
    let scaled = p.powf(-alpha.recip()) * prev;
    if hold {
        scaled
    } else {
        scaled.min(innovation)
    }
}

/// Non-negative factor weights `a_{s,n}`: `r` factors by `T` time points.
///
/// Time points are 1-based to match the series index.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    factors: usize,
    // column-major: column n occupies data[(n-1)*factors .. n*factors]
    data: Vec<f64>,
}

impl WeightMatrix {
    /// Builds from rows, one row per factor, one column per time point.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let factors = rows.len();
        if factors == 0 {
            return Err(Error::InvalidWeights("no factor rows".into()));
        }
        let times = rows[0].len();
        if times == 0 {
            return Err(Error::InvalidWeights("no time columns".into()));
        }
        if let Some(s) = rows.iter().position(|r| r.len() != times) {
            return Err(Error::InvalidWeights(format!(
                "row {} has {} columns, expected {times}",
                s + 1,
                rows[s].len()
            )));
        }
        let mut data = Vec::with_capacity(factors * times);
        for n in 0..times {
            for row in &rows {
                let a = row[n];
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::InvalidWeights(format!(
                        "weight {a} at column {} is not a finite non-negative number",
                        n + 1
                    )));
                }
                data.push(a);
            }
            let col = &data[n * factors..];
            if col.iter().sum::<f64>() <= 0.0 {
                return Err(Error::InvalidWeights(format!("column {} has zero total weight", n + 1)));
            }
        }
        Ok(Self { factors, data })
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn times(&self) -> usize {
        self.data.len() / self.factors
    }

    /// Weights of time point `n` (1-based).
    pub fn column(&self, n: usize) -> Option<&[f64]> {
        if n == 0 || n > self.times() {
            return None;
        }
        Some(&self.data[(n - 1) * self.factors..n * self.factors])
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.factors)
            .map(|s| (1..=self.times()).map(|n| self.column(n).unwrap()[s]).collect())
            .collect()
    }
}

/// The r-factor model with Fréchet(α) factors.
#[derive(Debug, Clone, PartialEq)]
pub struct RFactor {
    pub alpha: f64,
    pub weights: WeightMatrix,
}

impl RFactor {
    pub fn new(alpha: f64, weights: WeightMatrix) -> Result<Self> {
        check_positive("alpha", alpha)?;
        Ok(Self { alpha, weights })
    }

    /// `Σ_s a_{s,n}^α`, the scale of the marginal at time `n`.
    pub fn scale(&self, n: usize) -> Result<f64> {
        let col = self.column(n)?;
        Ok(col.iter().map(|a| a.powf(self.alpha)).sum())
    }

    fn column(&self, n: usize) -> Result<&[f64]> {
        self.weights.column(n).ok_or(Error::Index {
            column: n,
            available: self.weights.times(),
        })
    }

    /// `F_n(x) = exp(-x^{-1} Σ_s a_{s,n}^α)`.
    pub fn marginal_cdf(&self, n: usize, x: f64) -> Result<f64> {
        let scale = self.scale(n)?;
        Ok(if x <= 0.0 { 0.0 } else { (-scale / x).exp() })
    }

    /// `F_n^{-1}(u) = Σ_s a_{s,n}^α / (-ln u)`.
    pub fn marginal_quantile(&self, n: usize, u: f64) -> Result<f64> {
        Ok(self.scale(n)? / -u.ln())
    }

    /// Exact joint d.f. `P(X_i <= x_i, X_j <= x_j)`, computed from the
    /// factor representation: each unit-Fréchet `Z_s^α` must stay below
    /// `min(x_i / a_{s,i}^α, x_j / a_{s,j}^α)`.
    pub fn joint_cdf(&self, i: usize, j: usize, xi: f64, xj: f64) -> Result<f64> {
        let ci = self.column(i)?;
        let cj = self.column(j)?;
        if xi <= 0.0 || xj <= 0.0 {
            return Ok(0.0);
        }
        let exponent: f64 = ci
            .iter()
            .zip(cj)
            .map(|(ai, aj)| (ai.powf(self.alpha) / xi).max(aj.powf(self.alpha) / xj))
            .sum();
        Ok((-exponent).exp())
    }
}

/// One of the supported generating processes.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Mar1 {
        c: f64,
    },
    Mma1 {
        c: f64,
    },
    Yarp1 {
        p: f64,
        sigma: f64,
        alpha: f64,
    },
    RFactor(RFactor),
    /// Short-failures stopped clock with unit-Fréchet records; `q` is the
    /// stationary probability of a failed record.
    StoppedClock {
        q: f64,
    },
}

fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in (0, 1)",
        })
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be a finite positive number",
        })
    }
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

fn check_length(length: usize) -> Result<()> {
    if length < 2 {
        Err(Error::InvalidParameter {
            name: "length",
            value: length as f64,
            reason: "must be at least 2",
        })
    } else {
        Ok(())
    }
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Mar1 { c } | ModelSpec::Mma1 { c } => check_open_unit("c", *c),
            ModelSpec::Yarp1 { p, sigma, alpha } => {
                check_open_unit("p", *p)?;
                check_positive("sigma", *sigma)?;
                check_positive("alpha", *alpha)
            }
            ModelSpec::RFactor(rf) => check_positive("alpha", rf.alpha),
            ModelSpec::StoppedClock { q } => check_stop_probability(*q),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Mar1 { .. } => "mar1",
            ModelSpec::Mma1 { .. } => "mma1",
            ModelSpec::Yarp1 { .. } => "yarp1",
            ModelSpec::RFactor(_) => "rfactor",
            ModelSpec::StoppedClock { .. } => "stopped_clock",
        }
    }

    /// Short parameter description such as `c=0.25`.
    pub fn param_label(&self) -> String {
        match self {
            ModelSpec::Mar1 { c } | ModelSpec::Mma1 { c } => format!("c={c}"),
            ModelSpec::Yarp1 { p, sigma, alpha } => {
                if *sigma == 1.0 && *alpha == 1.0 {
                    format!("p={p}")
                } else {
                    format!("p={p};sigma={sigma};alpha={alpha}")
                }
            }
            ModelSpec::RFactor(rf) => format!("alpha={};r={};T={}", rf.alpha, rf.weights.factors(), rf.weights.times()),
            ModelSpec::StoppedClock { q } => format!("q={q}"),
        }
    }

    /// Lag-one tail dependence coefficient of a stationary model.
    ///
    /// The r-factor model is not stationary in general and has none.
    pub fn true_lambda(&self) -> Option<f64> {
        match self {
            ModelSpec::Mar1 { c } => Some(*c),
            ModelSpec::Mma1 { c } => Some(c.min(1.0 - c)),
            ModelSpec::Yarp1 { p, .. } => Some(*p),
            ModelSpec::RFactor(_) => None,
            ModelSpec::StoppedClock { q } => Some(*q),
        }
    }

    /// Marginal d.f. of `X_index`.
    pub fn marginal_cdf(&self, index: usize, x: f64) -> Result<f64> {
        match self {
            ModelSpec::Mar1 { .. } | ModelSpec::Mma1 { .. } | ModelSpec::StoppedClock { .. } => Ok(unit_frechet_cdf(x)),
            ModelSpec::Yarp1 { sigma, alpha, .. } => Ok(pareto3_cdf(x, *sigma, *alpha)),
            ModelSpec::RFactor(rf) => rf.marginal_cdf(index, x),
        }
    }

    pub fn simulate(&self, length: usize, seed: Seed) -> Result<TimeSeries> {
        self.simulate_with(length, &mut seed.rng())
    }

    pub fn simulate_with<R: Rng + ?Sized>(&self, length: usize, rng: &mut R) -> Result<TimeSeries> {
        self.validate()?;
        check_length(length)?;
        let values = match self {
            ModelSpec::Mar1 { c } => mar1_values(*c, length, rng),
            ModelSpec::Mma1 { c } => mma1_values(*c, length, rng),
            ModelSpec::Yarp1 { p, sigma, alpha } => yarp1_values(*p, *sigma, *alpha, length, rng),
            ModelSpec::RFactor(rf) => rfactor_values(rf, length, rng)?,
            ModelSpec::StoppedClock { q } => {
                let states = stopped_clock_states(*q, length, rng);
                let records: Vec<f64> = (0..length).map(|_| sample_unit_frechet(rng)).collect();
                stopped_clock_from_parts(&records, &states)
            }
        };
        Ok(TimeSeries::new(values)?.with_meta(Provenance {
            model: format!("{} {}", self.name(), self.param_label()),
            true_lambda: self.true_lambda(),
        }))
    }
}

pub fn simulate_mar1(c: f64, length: usize, seed: Seed) -> Result<TimeSeries> {
    ModelSpec::Mar1 { c }.simulate(length, seed)
}

pub fn simulate_mma1(c: f64, length: usize, seed: Seed) -> Result<TimeSeries> {
    ModelSpec::Mma1 { c }.simulate(length, seed)
}

pub fn simulate_yarp1(p: f64, sigma: f64, alpha: f64, length: usize, seed: Seed) -> Result<TimeSeries> {
    ModelSpec::Yarp1 { p, sigma, alpha }.simulate(length, seed)
}

pub fn simulate_rfactor(spec: &RFactor, length: usize, seed: Seed) -> Result<TimeSeries> {
    ModelSpec::RFactor(spec.clone()).simulate(length, seed)
}

pub fn simulate_stopped_clock(q: f64, length: usize, seed: Seed) -> Result<TimeSeries> {
    ModelSpec::StoppedClock { q }.simulate(length, seed)
}

fn mar1_values<R: Rng + ?Sized>(c: f64, length: usize, rng: &mut R) -> Vec<f64> {
    let mut prev = sample_unit_frechet(rng);
    (0..length)
        .map(|_| {
            prev = mar1_step(c, prev, sample_unit_frechet(rng));
            prev
        })
        .collect()
}

fn mma1_values<R: Rng + ?Sized>(c: f64, length: usize, rng: &mut R) -> Vec<f64> {
    let mut prev = sample_unit_frechet(rng);
    (0..length)
        .map(|_| {
            let current = sample_unit_frechet(rng);
            let x = mma1_step(c, current, prev);
            prev = current;
            x
        })
        .collect()
}

fn yarp1_values<R: Rng + ?Sized>(p: f64, sigma: f64, alpha: f64, length: usize, rng: &mut R) -> Vec<f64> {
    let mut prev = pareto3_from_uniform(rng.sample(Open01), sigma, alpha);
    (0..length)
        .map(|_| {
            let hold = rng.gen_bool(p);
            let innovation = pareto3_from_uniform(rng.sample(Open01), sigma, alpha);
            prev = yarp1_step(p, alpha, prev, hold, innovation);
            prev
        })
        .collect()
}

fn rfactor_values<R: Rng + ?Sized>(rf: &RFactor, length: usize, rng: &mut R) -> Result<Vec<f64>> {
    let available = rf.weights.times();
    if length > available {
        return Err(Error::InsufficientWeights {
            needed: length,
            available,
        });
    }
    let alpha = rf.alpha;
    // Z_s = (-ln U)^{-1/α} is Fréchet(α); Z_s^α is then unit Fréchet.
    let factors: Vec<f64> = (0..rf.weights.factors())
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            (-u.ln()).powf(-alpha.recip()).powf(alpha)
        })
        .collect();
    Ok((1..=length)
        .map(|n| {
            rf.weights
                .column(n)
                .unwrap()
                .iter()
                .zip(&factors)
                .map(|(a, z)| a.powf(alpha) * z)
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Recording states of the short-failures chain; `false` marks a failed
/// record (`Z_n = 0`).
///
/// The chain starts from its stationary law `P(Z = 0) = q`; a failure is
/// always followed by a record, and a record is followed by a failure with
/// probability `q / (1 - q)`.
pub fn stopped_clock_states<R: Rng + ?Sized>(q: f64, length: usize, rng: &mut R) -> Vec<bool> {
    let fail_after_record = q / (1.0 - q);
    let mut states = Vec::with_capacity(length);
    let mut recorded = !rng.gen_bool(q);
    for _ in 0..length {
        states.push(recorded);
        recorded = if recorded {
            !rng.gen_bool(fail_after_record)
        } else {
            true
        };
    }
    states
}

/// Builds `X` from records `Y` and states `Z`: `X_1 = Y_1`, and later
/// positions repeat the previous value whenever the record failed.
pub fn stopped_clock_from_parts(records: &[f64], states: &[bool]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(records.len());
    for (k, (&y, &recorded)) in records.iter().zip(states).enumerate() {
        let x = if k == 0 || recorded { y } else { out[k - 1] };
        out.push(x);
    }
    out
}
