//! Expected oracle cost until global convergence, bootstrap intervals and
//! the dimension-scaling fit.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::record::{Outcome, TrialRecord};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no trials to aggregate")]
    Empty,
    #[error("need at least two distinct dimensions with finite cost, got {0}")]
    TooFewPoints(usize),
}

/// The cost of one trial and whether it found the global optimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialCost {
    pub cost: f64,
    pub outcome: Outcome,
}

impl TrialCost {
    pub fn from_record(r: &TrialRecord) -> Self {
        Self {
            cost: r.oracle_calls as f64,
            outcome: r.outcome,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub n_trials: usize,
    pub n_global: usize,
    pub n_budget: usize,
    /// Mean cost over non-global trials; 0 when every trial was global.
    pub o_local: f64,
    pub o_global: f64,
    pub p_global: f64,
    pub o_single: f64,
    /// Infinite when no trial was global; `unbounded` is then set.
    pub o_total: f64,
    pub unbounded: bool,
}

/// `o_single = o_local (1 - p) + o_global p` and `o_total = o_single / p`.
pub fn compose(o_local: f64, o_global: f64, p_global: f64) -> (f64, f64) {
    let o_single = o_local * (1.0 - p_global) + o_global * p_global;
    let o_total = if p_global > 0.0 { o_single / p_global } else { f64::INFINITY };
    (o_single, o_total)
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Budget trials count as failures alongside local ones.
pub fn aggregate(trials: &[TrialCost]) -> Result<RunStats, MetricsError> {
    if trials.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = trials.len();
    let n_global = trials.iter().filter(|t| t.outcome == Outcome::Global).count();
    let n_budget = trials.iter().filter(|t| t.outcome == Outcome::Budget).count();
    let o_global = mean(trials.iter().filter(|t| t.outcome == Outcome::Global).map(|t| t.cost)).unwrap_or(0.0);
    let o_local = mean(trials.iter().filter(|t| t.outcome != Outcome::Global).map(|t| t.cost)).unwrap_or(0.0);
    let p_global = n_global as f64 / n as f64;
    let (o_single, o_total) = compose(o_local, o_global, p_global);
    Ok(RunStats {
        n_trials: n,
        n_global,
        n_budget,
        o_local,
        o_global,
        p_global,
        o_single,
        o_total,
        unbounded: n_global == 0,
    })
}

pub fn aggregate_records(records: &[TrialRecord]) -> Result<RunStats, MetricsError> {
    aggregate(&records.iter().map(TrialCost::from_record).collect::<Vec<_>>())
}

pub const DEFAULT_RESAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    /// The upper percentile fell on a resample without any global trial.
    pub unbounded: bool,
}

/// Percentile with linear interpolation; infinite neighbours stay infinite.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let (a, b) = (sorted[lo], sorted[hi]);
    if lo == hi || a == b {
        a
    } else if b.is_infinite() {
        f64::INFINITY
    } else {
        a + (rank - lo as f64) * (b - a)
    }
}

/// 5th and 95th percentiles of `o_total` over bootstrap resamples of the trials.
pub fn bootstrap_ci<R: Rng + ?Sized>(
    trials: &[TrialCost],
    resamples: usize,
    rng: &mut R,
) -> Result<Interval, MetricsError> {
    if trials.is_empty() || resamples == 0 {
        return Err(MetricsError::Empty);
    }
    let n = trials.len();
    let mut totals = Vec::with_capacity(resamples);
    let mut sample = Vec::with_capacity(n);
    for _ in 0..resamples {
        sample.clear();
        sample.extend((0..n).map(|_| trials[rng.random_range(0..n)]));
        totals.push(aggregate(&sample)?.o_total);
    }
    totals.sort_by(f64::total_cmp);
    let hi = percentile(&totals, 0.95);
    Ok(Interval {
        lo: percentile(&totals, 0.05),
        hi,
        unbounded: hi.is_infinite(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares of `log10(o_total)` on dimension; non-finite costs are skipped.
pub fn scaling_regression(points: &[(f64, f64)]) -> Result<Regression, MetricsError> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(d, o)| d.is_finite() && o.is_finite() && *o > 0.0)
        .map(|&(d, o)| (d, o.log10()))
        .collect();
    let mut dims: Vec<f64> = pts.iter().map(|p| p.0).collect();
    dims.sort_by(f64::total_cmp);
    dims.dedup();
    if dims.len() < 2 {
        return Err(MetricsError::TooFewPoints(dims.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(Regression {
        slope,
        intercept,
        r_squared,
    })
}
