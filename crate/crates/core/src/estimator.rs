//! Classical estimates of amplitude-amplification cost.
//!
//! The surrogates replace each amplitude amplification with rejection
//! sampling from the same initial distribution. The acceptance rate of a
//! generation estimates the good fraction `p`, and the optimal rotation
//! count at that `p` lower-bounds what the quantum sampler would spend.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::{aggregate, MetricsError, TrialCost};
use crate::optimizers::{gas_loop, quads_loop, ClassicalSampler, GasConfig, QuadsConfig};
use crate::record::{Outcome, TrialRecord};
use crate::testbed::Problem;

/// Factor from the lower bound to the point estimate of total cost.
pub const TOTAL_FACTOR: f64 = 2.3;

/// Stop summing once the probability of still being unaccepted drops below this.
pub const SERIES_TAIL: f64 = 1e-12;

pub const DEFAULT_MAX_TERMS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimatorError {
    #[error("probability {0} outside (0, 1]")]
    Probability(f64),
    #[error("growth rate {0} must exceed 1")]
    Rate(f64),
    #[error("series did not converge within {0} terms")]
    NonConvergence(usize),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Rotation count that brings success probability to exactly 1.
pub fn n_opt(p: f64) -> Result<f64, EstimatorError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(EstimatorError::Probability(p));
    }
    let s = p.sqrt();
    Ok(s.acos() / (2.0 * s.asin()))
}

/// Walks the attempts of the randomized rotation schedule and sums
/// `unaccepted_mass * cost(n_k, a)` with `a` the success probabilities.
fn schedule_series(
    p: f64,
    lambda: f64,
    max_terms: usize,
    cost: impl Fn(u64, &[f64]) -> f64,
) -> Result<f64, EstimatorError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(EstimatorError::Probability(p));
    }
    if lambda.is_nan() || lambda <= 1.0 {
        return Err(EstimatorError::Rate(lambda));
    }
    let angle = p.sqrt().asin();
    let mut unaccepted = 1.0;
    let mut total = 0.0;
    let mut m = 1.0f64;
    let mut a = Vec::new();
    for _ in 0..max_terms {
        let n = m.floor() as u64;
        a.clear();
        a.extend((0..=n).map(|r| ((2 * r + 1) as f64 * angle).sin().powi(2)));
        total += unaccepted * cost(n, &a);
        let accept = a.iter().sum::<f64>() / (n + 1) as f64;
        unaccepted *= 1.0 - accept;
        if unaccepted < SERIES_TAIL {
            return Ok(total);
        }
        m *= lambda;
    }
    Err(EstimatorError::NonConvergence(max_terms))
}

/// Expected rotations spent before a sample is accepted, counting the
/// rotations of every attempt (rejected ones included).
pub fn s_of_p(p: f64, lambda: f64, max_terms: usize) -> Result<f64, EstimatorError> {
    schedule_series(p, lambda, max_terms, |n, _| n as f64 / 2.0)
}

/// The series with each attempt weighted by `sum_r r a_r / (n_k + 1)`,
/// i.e. counting an attempt's rotations only when that attempt accepts.
pub fn s_of_p_literal(p: f64, lambda: f64, max_terms: usize) -> Result<f64, EstimatorError> {
    schedule_series(p, lambda, max_terms, |n, a| {
        a.iter().enumerate().map(|(r, ar)| r as f64 * ar).sum::<f64>() / (n + 1) as f64
    })
}

/// Accepted samples and total draws in one generation of a surrogate run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationStat {
    pub generation: u64,
    pub accepted: u64,
    pub attempts: u64,
}

impl IterationStat {
    pub fn p_tilde(&self) -> f64 {
        self.accepted as f64 / self.attempts as f64
    }
}

/// How generation costs combine into a trial cost.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostWeighting {
    /// `sum_i M_i n_opt(p_i)`: one amplification per accepted sample.
    #[default]
    Weighted,
    /// `sum_i n_opt(p_i)`.
    Unweighted,
}

pub fn trial_cost(stats: &[IterationStat], weighting: CostWeighting) -> f64 {
    stats
        .iter()
        .map(|s| {
            let n = n_opt(s.p_tilde()).expect("a generation accepts at least once");
            match weighting {
                CostWeighting::Weighted => s.accepted as f64 * n,
                CostWeighting::Unweighted => n,
            }
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateTrial {
    pub record: TrialRecord,
    pub stats: Vec<IterationStat>,
}

impl SurrogateTrial {
    fn new(mut record: TrialRecord, stats: Vec<IterationStat>, weighting: CostWeighting) -> Self {
        record.estimated_quantum_cost = Some(trial_cost(&stats, weighting));
        Self { record, stats }
    }
}

/// GAS with every amplification replaced by uniform rejection sampling.
pub fn run_gas_surrogate<R: Rng + ?Sized>(
    problem: &Problem,
    config: &GasConfig,
    weighting: CostWeighting,
    rng: &mut R,
) -> SurrogateTrial {
    let (record, stats) = gas_loop("gas-surrogate", problem, config, &mut ClassicalSampler::default(), rng);
    SurrogateTrial::new(record, stats, weighting)
}

/// QuADS with Gaussian draws snapped to the grid in place of amplification.
pub fn run_quads_surrogate<R: Rng + ?Sized>(
    problem: &Problem,
    config: &QuadsConfig,
    weighting: CostWeighting,
    rng: &mut R,
) -> SurrogateTrial {
    let (record, stats) = quads_loop("quads-surrogate", problem, config, &mut ClassicalSampler::default(), rng);
    SurrogateTrial::new(record, stats, weighting)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n_trials: usize,
    pub n_global: usize,
    pub p_global: f64,
    pub o_local: f64,
    pub o_global: f64,
    pub o_single: f64,
    pub o_lower: f64,
    /// Always `TOTAL_FACTOR * o_lower`.
    pub o_total: f64,
    pub unbounded: bool,
}

/// Composes per-trial estimated costs into the expected-cost lower bound.
pub fn estimate_lower_bound(
    trials: &[(Vec<IterationStat>, Outcome)],
    weighting: CostWeighting,
) -> Result<EstimateReport, EstimatorError> {
    let costs: Vec<TrialCost> = trials
        .iter()
        .map(|(stats, outcome)| TrialCost {
            cost: trial_cost(stats, weighting),
            outcome: *outcome,
        })
        .collect();
    let s = aggregate(&costs)?;
    Ok(EstimateReport {
        n_trials: s.n_trials,
        n_global: s.n_global,
        p_global: s.p_global,
        o_local: s.o_local,
        o_global: s.o_global,
        o_single: s.o_single,
        o_lower: s.o_total,
        o_total: TOTAL_FACTOR * s.o_total,
        unbounded: s.unbounded,
    })
}

/// [`estimate_lower_bound`] over finished surrogate trials.
pub fn estimate_from_trials(trials: &[SurrogateTrial], weighting: CostWeighting) -> Result<EstimateReport, EstimatorError> {
    let pairs: Vec<(Vec<IterationStat>, Outcome)> = trials.iter().map(|t| (t.stats.clone(), t.record.outcome)).collect();
    estimate_lower_bound(&pairs, weighting)
}
