//! Re-derives the ratio between simulated and estimated quantum cost.
//!
//! Each cell is run twice with the same trial seeds: once on the full
//! statevector and once with the classical surrogate. The ratio of the
//! simulated expected total to the estimated lower bound is the factor the
//! estimator assumes to be [`TOTAL_FACTOR`].

use quads_core::estimator::TOTAL_FACTOR;
use quads_core::metrics::Interval;
use serde::{Deserialize, Serialize};

use crate::plan::{Cell, PlanError};
use crate::report::summarize;
use crate::runner::{prepare, run_trials, CellResult, Route, RunError, TrialSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub cell: Cell,
    pub trials: u64,
    /// Simulated expected total and its bootstrap interval.
    pub o_total: f64,
    pub interval: Interval,
    /// Estimated lower bound from the surrogate.
    pub o_lower: f64,
    /// `o_total / o_lower`.
    pub factor: f64,
    /// `TOTAL_FACTOR * o_lower`.
    pub predicted: f64,
    pub lower_bound_holds: bool,
    pub predicted_in_interval: bool,
}

pub fn calibrate(cell: &Cell, settings: &TrialSettings, trials: u64, resamples: usize) -> Result<Calibration, RunError> {
    if !cell.method.is_quantum() {
        return Err(PlanError::Invalid(format!("{} has no quantum cost to calibrate", cell.method)).into());
    }
    let (problem, route) = prepare(cell, settings.max_amplitudes, false)?;
    debug_assert_eq!(route, Route::Statevector);
    let simulated = CellResult {
        cell: cell.clone(),
        route,
        records: run_trials(cell, route, &problem, settings, trials)?,
        resumed: false,
    };
    let estimated = CellResult {
        records: run_trials(cell, Route::Surrogate, &problem, settings, trials)?,
        route: Route::Surrogate,
        ..simulated.clone()
    };
    let sim = summarize(&simulated, settings.seed, resamples);
    let est = summarize(&estimated, settings.seed, resamples);
    let o_lower = est.o_lower.expect("surrogate summaries carry a lower bound");
    let predicted = TOTAL_FACTOR * o_lower;
    Ok(Calibration {
        cell: cell.clone(),
        trials,
        o_total: sim.o_total,
        interval: Interval {
            lo: sim.ci_lo,
            hi: sim.ci_hi,
            unbounded: sim.ci_unbounded,
        },
        o_lower,
        factor: sim.o_total / o_lower,
        predicted,
        lower_bound_holds: o_lower <= sim.o_total,
        predicted_in_interval: sim.ci_lo <= predicted && predicted <= sim.ci_hi,
    })
}

/// Geometric mean of the finite factors, or `None` if there are none.
pub fn pooled_factor(cals: &[Calibration]) -> Option<f64> {
    let logs: Vec<f64> = cals.iter().map(|c| c.factor).filter(|f| f.is_finite() && *f > 0.0).map(f64::ln).collect();
    (!logs.is_empty()).then(|| (logs.iter().sum::<f64>() / logs.len() as f64).exp())
}
