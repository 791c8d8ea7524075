//! Grover adaptive search and QuADS.
//!
//! Both optimizers share one control loop per method; only the way a point
//! below the threshold is obtained differs between the statevector
//! simulation here and the classical surrogates in [`crate::estimator`].

mod engine;
mod samplers;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::quantum::{QuantumError, DEFAULT_GROWTH, DEFAULT_MAX_AMPLITUDES};
use crate::record::TrialRecord;
use crate::testbed::Problem;

pub(crate) use engine::{gas_loop, quads_loop};
pub(crate) use samplers::ClassicalSampler;
use samplers::QuantumSampler;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizerError {
    #[error("quantile of an empty sample")]
    EmptySample,
    #[error("quantile level {0} outside [0, 1]")]
    QuantileLevel(f64),
    #[error("the problem has no value table; statevector simulation needs one")]
    MissingValueTable,
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GasConfig {
    pub lambda: f64,
    pub eps: f64,
    pub budget: u64,
    pub max_amplitudes: u64,
    pub record_generations: bool,
}

impl Default for GasConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_GROWTH,
            eps: 0.01,
            budget: 1_000_000,
            max_amplitudes: DEFAULT_MAX_AMPLITUDES,
            record_generations: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadsConfig {
    pub alpha: f64,
    pub q: f64,
    pub lambda: f64,
    pub eps: f64,
    pub eps_sigma: f64,
    pub sigma0: f64,
    /// Accepted samples per generation; `None` uses the CMA-ES selection size.
    pub samples: Option<usize>,
    pub budget: u64,
    pub max_amplitudes: u64,
    pub record_generations: bool,
}

impl Default for QuadsConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            q: 0.2,
            lambda: DEFAULT_GROWTH,
            eps: 0.01,
            eps_sigma: 0.01,
            sigma0: 0.5,
            samples: None,
            budget: 1_000_000,
            max_amplitudes: DEFAULT_MAX_AMPLITUDES,
            record_generations: false,
        }
    }
}

impl QuadsConfig {
    pub(crate) fn samples_for(&self, dimension: usize) -> usize {
        self.samples
            .unwrap_or_else(|| crate::cma::default_population(dimension).selected)
            .max(1)
    }
}

/// Linear interpolation between order statistics at rank `q (n - 1)`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64, OptimizerError> {
    if values.is_empty() {
        return Err(OptimizerError::EmptySample);
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(OptimizerError::QuantileLevel(q));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    Ok(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// `alpha theta + (1 - alpha) quantile_q(values)`.
pub fn update_threshold(theta: f64, values: &[f64], alpha: f64, q: f64) -> Result<f64, OptimizerError> {
    let qv = quantile(values, q)?;
    if alpha == 1.0 {
        return Ok(theta);
    }
    Ok(alpha * theta + (1.0 - alpha) * qv)
}

fn value_table(problem: &Problem) -> Result<&crate::testbed::GridValues, OptimizerError> {
    problem.values.as_deref().ok_or(OptimizerError::MissingValueTable)
}

/// Grover adaptive search from the uniform superposition.
///
/// Outcomes are `Global` or `Budget` only. A numerical failure inside the
/// simulation is flagged and reported as `Budget`.
pub fn run_gas<R: Rng + ?Sized>(problem: &Problem, config: &GasConfig, rng: &mut R) -> Result<TrialRecord, OptimizerError> {
    let values = value_table(problem)?;
    if problem.grid.total_points() > config.max_amplitudes {
        return Err(QuantumError::TooLarge {
            amplitudes: problem.grid.total_points(),
            cap: config.max_amplitudes,
        }
        .into());
    }
    let mut sampler = QuantumSampler::new(values, config.lambda, config.max_amplitudes);
    let (record, _) = gas_loop("gas", problem, config, &mut sampler, rng);
    Ok(record)
}

/// QuADS: amplitude amplification from an adaptive Gaussian state, with the
/// CMA-ES update on accepted points and a smoothed quantile threshold.
pub fn run_quads<R: Rng + ?Sized>(
    problem: &Problem,
    config: &QuadsConfig,
    rng: &mut R,
) -> Result<TrialRecord, OptimizerError> {
    let values = value_table(problem)?;
    if problem.grid.total_points() > config.max_amplitudes {
        return Err(QuantumError::TooLarge {
            amplitudes: problem.grid.total_points(),
            cap: config.max_amplitudes,
        }
        .into());
    }
    if !(config.lambda > 1.0 && config.lambda < 4.0 / 3.0) {
        return Err(QuantumError::InvalidRate(config.lambda).into());
    }
    let mut sampler = QuantumSampler::new(values, config.lambda, config.max_amplitudes);
    let (record, _) = quads_loop("quads", problem, config, &mut sampler, rng);
    Ok(record)
}
