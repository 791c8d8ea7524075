use nalgebra::DVector;
use rand::Rng;

use super::{update_threshold, GasConfig, QuadsConfig};
use crate::accounting::{Halt, OracleLedger, TrialTracker};
use crate::cma::{cma_update, default_hyperparams, outcome_of, select_best, DistributionState};
use crate::estimator::IterationStat;
use crate::record::{GenerationTrace, Outcome, TrialRecord};
use crate::testbed::Problem;

/// One accepted point and the number of measurements or draws it took.
#[derive(Debug, Clone)]
pub(crate) struct Draw {
    pub point: Vec<f64>,
    pub value: f64,
    pub attempts: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Stop {
    Halt(Halt),
    Failed,
}

impl From<Halt> for Stop {
    fn from(h: Halt) -> Self {
        Stop::Halt(h)
    }
}

/// Source of points with value strictly below a threshold.
pub(crate) trait ThresholdSampler {
    fn set_uniform(&mut self, problem: &Problem) -> Result<(), Stop>;
    fn set_distribution(&mut self, problem: &Problem, state: &DistributionState) -> Result<(), Stop>;
    fn draw<R: Rng + ?Sized>(
        &mut self,
        problem: &Problem,
        theta: f64,
        rng: &mut R,
        tracker: &mut TrialTracker<'_>,
    ) -> Result<Draw, Stop>;
}

fn finish(mut record: TrialRecord, tracker: TrialTracker<'_>) -> TrialRecord {
    let (counter, trace, best, point) = tracker.finish();
    record.set_counts(counter);
    record.best_value = best;
    record.best_point = point;
    record.best_value_trace = trace;
    record
}

pub(crate) fn gas_loop<S, R>(
    method: &str,
    problem: &Problem,
    config: &GasConfig,
    sampler: &mut S,
    rng: &mut R,
) -> (TrialRecord, Vec<IterationStat>)
where
    S: ThresholdSampler,
    R: Rng + ?Sized,
{
    let grid = problem.grid;
    let mut record = TrialRecord::new(method, problem.spec.name(), grid.dimension(), grid.bits());
    let mut tracker = TrialTracker::new(&problem.optimum, config.eps, config.budget);
    let mut stats = Vec::new();
    let mut iterations = 0u64;

    let start = grid
        .index_to_point(rng.random_range(0..grid.total_points()))
        .expect("index drawn in range");
    let result: Result<(), Stop> = (|| {
        let mut theta = tracker.evaluate(&problem.spec, &start)?;
        sampler.set_uniform(problem)?;
        loop {
            let d = sampler.draw(problem, theta, rng, &mut tracker)?;
            stats.push(IterationStat {
                generation: iterations,
                accepted: 1,
                attempts: d.attempts,
            });
            iterations += 1;
            theta = d.value;
            if config.record_generations {
                let c = tracker.counter();
                record.generation_trace.push(GenerationTrace {
                    generation: iterations,
                    mean: Vec::new(),
                    sigma: None,
                    theta: Some(theta),
                    accepted_values: vec![d.value],
                    quantum_calls: c.quantum_calls,
                    classical_evals: c.classical_evals,
                });
            }
        }
    })();
    record.outcome = match result {
        Err(Stop::Halt(h)) => outcome_of(h),
        Err(Stop::Failed) | Ok(()) => {
            record.failure = true;
            Outcome::Budget
        }
    };
    record.generations = iterations;
    (finish(record, tracker), stats)
}

pub(crate) fn quads_loop<S, R>(
    method: &str,
    problem: &Problem,
    config: &QuadsConfig,
    sampler: &mut S,
    rng: &mut R,
) -> (TrialRecord, Vec<IterationStat>)
where
    S: ThresholdSampler,
    R: Rng + ?Sized,
{
    let grid = problem.grid;
    let d = grid.dimension();
    let k = config.samples_for(d);
    let hp = default_hyperparams(d, k);
    let mut record = TrialRecord::new(method, problem.spec.name(), d, grid.bits());
    let mut tracker = TrialTracker::new(&problem.optimum, config.eps, config.budget);
    let mut stats = Vec::new();

    let mean0: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let mut state = DistributionState::new(DVector::from_vec(mean0), config.sigma0);

    // The oracle only sees grid points, so the opening threshold is read at
    // the cell holding the mean. A continuous mean could undercut every grid
    // value and leave nothing to amplify.
    let start = grid.snap(state.mean.as_slice()).expect("mean has the grid dimension");
    let result: Result<Outcome, Stop> = (|| {
        let mut theta = tracker.evaluate(&problem.spec, &start)?;
        loop {
            if state.sigma < config.eps_sigma {
                return Ok(Outcome::Local);
            }
            sampler.set_distribution(problem, &state)?;
            let mut points = Vec::with_capacity(k);
            let mut values = Vec::with_capacity(k);
            let mut attempts = 0;
            while points.len() < k {
                let draw = sampler.draw(problem, theta, rng, &mut tracker)?;
                attempts += draw.attempts;
                values.push(draw.value);
                points.push(DVector::from_vec(draw.point));
            }
            stats.push(IterationStat {
                generation: state.generation,
                accepted: k as u64,
                attempts,
            });
            let order = select_best(&values, k);
            let selected: Vec<DVector<f64>> = order.iter().map(|&i| points[i].clone()).collect();
            state = cma_update(&state, &selected, &hp).map_err(|_| Stop::Failed)?;
            theta = update_threshold(theta, &values, config.alpha, config.q).map_err(|_| Stop::Failed)?;
            if config.record_generations {
                let c = tracker.counter();
                record.generation_trace.push(GenerationTrace {
                    generation: state.generation,
                    mean: state.mean.iter().copied().collect(),
                    sigma: Some(state.sigma),
                    theta: Some(theta),
                    accepted_values: order.iter().map(|&i| values[i]).collect(),
                    quantum_calls: c.quantum_calls,
                    classical_evals: c.classical_evals,
                });
            }
        }
    })();
    record.outcome = match result {
        Ok(o) => o,
        Err(Stop::Halt(h)) => outcome_of(h),
        Err(Stop::Failed) => {
            record.failure = true;
            Outcome::Local
        }
    };
    record.generations = state.generation;
    record.final_state = Some(state.snapshot());
    (finish(record, tracker), stats)
}
