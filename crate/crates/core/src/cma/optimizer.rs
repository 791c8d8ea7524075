use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{cma_update, default_hyperparams, default_population, select_best, CmaError, DistributionState, PopulationConfig, TruncatedNormal};
use crate::accounting::{Halt, OracleLedger, TrialTracker};
use crate::record::{GenerationTrace, Outcome, TrialRecord};
use crate::testbed::Problem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CmaesConfig {
    /// `None` uses [`default_population`] for the problem dimension.
    pub population: Option<PopulationConfig>,
    pub sigma0: f64,
    pub eps: f64,
    pub eps_sigma: f64,
    pub budget: u64,
    pub record_generations: bool,
}

impl Default for CmaesConfig {
    fn default() -> Self {
        Self {
            population: None,
            sigma0: 0.5,
            eps: 0.01,
            eps_sigma: 0.01,
            budget: 1_000_000,
            record_generations: false,
        }
    }
}

/// Classical CMA-ES on the continuous unit cube.
///
/// Ends `Global` on the first evaluated point inside the hit ball, `Local`
/// once `sigma < eps_sigma` (or on a numerical failure, flagged), and
/// `Budget` when the evaluation count passes the budget.
pub fn run_cmaes<R: Rng + ?Sized>(problem: &Problem, config: &CmaesConfig, rng: &mut R) -> TrialRecord {
    let d = problem.dimension();
    let pop = config.population.unwrap_or_else(|| default_population(d));
    let hp = default_hyperparams(d, pop.selected);
    let mut record = TrialRecord::new("cmaes", problem.spec.name(), d, problem.grid.bits());
    let mut tracker = TrialTracker::new(&problem.optimum, config.eps, config.budget);

    let mean0: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let mut state = DistributionState::new(DVector::from_vec(mean0), config.sigma0);

    let result: Result<Outcome, CmaError> = (|| {
        if let Err(halt) = tracker.evaluate(&problem.spec, state.mean.as_slice()) {
            return Ok(outcome_of(halt));
        }
        loop {
            if state.sigma < config.eps_sigma {
                return Ok(Outcome::Local);
            }
            let dist = TruncatedNormal::new(&state)?;
            let mut points = Vec::with_capacity(pop.population);
            let mut values = Vec::with_capacity(pop.population);
            for _ in 0..pop.population {
                let x = dist.sample(rng);
                match tracker.evaluate(&problem.spec, x.as_slice()) {
                    Ok(v) => values.push(v),
                    Err(halt) => return Ok(outcome_of(halt)),
                }
                points.push(x);
            }
            let order = select_best(&values, pop.selected);
            let selected: Vec<DVector<f64>> = order.iter().map(|&i| points[i].clone()).collect();
            state = cma_update(&state, &selected, &hp)?;
            if config.record_generations {
                let counter = tracker.counter();
                record.generation_trace.push(GenerationTrace {
                    generation: state.generation,
                    mean: state.mean.iter().copied().collect(),
                    sigma: Some(state.sigma),
                    theta: None,
                    accepted_values: order.iter().map(|&i| values[i]).collect(),
                    quantum_calls: counter.quantum_calls,
                    classical_evals: counter.classical_evals,
                });
            }
        }
    })();

    record.outcome = match result {
        Ok(o) => o,
        Err(_) => {
            record.failure = true;
            Outcome::Local
        }
    };
    record.generations = state.generation;
    record.final_state = Some(state.snapshot());
    let (counter, trace, best, point) = tracker.finish();
    record.set_counts(counter);
    record.best_value = best;
    record.best_point = point;
    record.best_value_trace = trace;
    record
}

pub(crate) fn outcome_of(halt: Halt) -> Outcome {
    match halt {
        Halt::GlobalHit => Outcome::Global,
        Halt::BudgetExhausted => Outcome::Budget,
    }
}
