use rand::Rng;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{local_minimize, NelderMeadConfig};
use super::finish;
use crate::accounting::{Halt, TrialTracker};
use crate::cma::outcome_of;
use crate::record::{Outcome, TrialRecord};
use crate::testbed::Problem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasinHoppingConfig {
    /// Half-width of the uniform perturbation, scaled units.
    pub step: f64,
    /// Metropolis temperature on raw function differences; may be infinite.
    pub temperature: f64,
    pub max_hops: u64,
    pub eps: f64,
    pub budget: u64,
    pub local: NelderMeadConfig,
}

impl Default for BasinHoppingConfig {
    fn default() -> Self {
        Self {
            step: 0.25,
            temperature: 1.0,
            max_hops: 1000,
            eps: 0.01,
            budget: 1_000_000,
            local: NelderMeadConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopState {
    pub current: Vec<f64>,
    pub current_value: f64,
    pub best: Vec<f64>,
    pub best_value: f64,
    pub hops: u64,
    pub accepted: u64,
}

fn metropolis<R: Rng + ?Sized>(delta: f64, temperature: f64, rng: &mut R) -> bool {
    if delta <= 0.0 || temperature == f64::INFINITY {
        return true;
    }
    rng.random::<f64>() < (-delta / temperature).exp()
}

/// Basin hopping with projected Nelder-Mead as the local step.
///
/// Every hop draws a uniform perturbation of the current point, clamps it
/// to the cube, minimizes locally and applies the Metropolis rule. Ends
/// `Global` on a hit, `Local` after `max_hops`, `Budget` on the cap.
pub fn run_basinhopping<R: Rng + ?Sized>(problem: &Problem, config: &BasinHoppingConfig, rng: &mut R) -> TrialRecord {
    let (record, _) = hop_trial(problem, config, rng);
    record
}

pub(crate) fn hop_trial<R: Rng + ?Sized>(
    problem: &Problem,
    config: &BasinHoppingConfig,
    rng: &mut R,
) -> (TrialRecord, Option<HopState>) {
    let d = problem.dimension();
    let mut record = TrialRecord::new("basinhopping-nm", problem.spec.name(), d, problem.grid.bits());
    let mut tracker = TrialTracker::new(&problem.optimum, config.eps, config.budget);
    let mut state: Option<HopState> = None;

    let result: Result<Outcome, Halt> = (|| {
        let x0: Vec<f64> = (0..d).map(|_| rng.random()).collect();
        let first = local_minimize(&x0, None, &config.local, |x| tracker.evaluate(&problem.spec, x))?;
        let s = state.insert(HopState {
            current: first.point.clone(),
            current_value: first.value,
            best: first.point,
            best_value: first.value,
            hops: 0,
            accepted: 0,
        });
        while s.hops < config.max_hops {
            let trial: Vec<f64> = s
                .current
                .iter()
                .map(|&c| (c + rng.random_range(-1.0..=1.0) * config.step).clamp(0.0, 1.0))
                .collect();
            let local = local_minimize(&trial, None, &config.local, |x| tracker.evaluate(&problem.spec, x))?;
            s.hops += 1;
            if local.value < s.best_value {
                s.best_value = local.value;
                s.best.clone_from(&local.point);
            }
            if metropolis(local.value - s.current_value, config.temperature, rng) {
                s.current = local.point;
                s.current_value = local.value;
                s.accepted += 1;
            }
        }
        Ok(Outcome::Local)
    })();
    record.outcome = result.unwrap_or_else(outcome_of);
    record.generations = state.as_ref().map_or(0, |s| s.hops);
    (finish(record, tracker), state)
}
