//! Smoothness and tail-dependence coefficients for sequences, with exact
//! samplers for max-autoregressive, moving-maximum, Pareto minification,
//! r-factor and stopped-clock processes, three estimators of the lag-one
//! tail dependence coefficient, and a replicated simulation harness.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod gof;
pub mod io;
pub mod models;
pub mod montecarlo;
pub mod series;
pub mod theory;

pub use error::{Error, Result};
pub use estimators::{EstimateReport, EstimatorKind};
pub use models::{ModelSpec, RFactor, Seed, WeightMatrix};
pub use montecarlo::{AbiasMode, ExperimentConfig, ExperimentResult, LevelRule, ModelCase};
pub use series::{CrossingCounts, Level, LevelChoice, TimeSeries, UniformSeries};
pub use theory::{SmoothnessValue, SpectralWeights};
