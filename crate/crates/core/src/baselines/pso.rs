use rand::Rng;
use serde::{Deserialize, Serialize};

use super::finish;
use crate::accounting::{Halt, TrialTracker};
use crate::cma::outcome_of;
use crate::record::{Outcome, TrialRecord};
use crate::testbed::Problem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoConfig {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// `None` uses ten particles per dimension.
    pub swarm_size: Option<usize>,
    /// Iterations without a global-best gain above `min_improvement` before stopping.
    pub stagnation: u64,
    pub min_improvement: f64,
    pub eps: f64,
    pub budget: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            inertia: 0.9,
            cognitive: 0.5,
            social: 0.3,
            swarm_size: None,
            stagnation: 50,
            min_improvement: 1e-12,
            eps: 0.01,
            budget: 1_000_000,
        }
    }
}

/// Particle positions and velocities in scaled coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub personal_best: Vec<Vec<f64>>,
    pub personal_value: Vec<f64>,
    pub global_best: Vec<f64>,
    pub global_value: f64,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Swarm {
    /// A swarm at rest at the given points, with their values as personal bests.
    pub fn at_rest(positions: Vec<Vec<f64>>, values: Vec<f64>, config: &PsoConfig) -> Self {
        let d = positions.first().map_or(0, Vec::len);
        let best = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i);
        Self {
            velocities: vec![vec![0.0; d]; positions.len()],
            personal_best: positions.clone(),
            global_best: positions[best].clone(),
            global_value: values[best],
            personal_value: values,
            positions,
            inertia: config.inertia,
            cognitive: config.cognitive,
            social: config.social,
        }
    }
}

/// Moves every particle once, in order, then refreshes the global best.
///
/// Each particle draws `r1` then `r2`. A coordinate pushed outside the unit
/// interval is clamped and its velocity component zeroed.
pub fn pso_step<R, F, E>(swarm: &mut Swarm, rng: &mut R, mut evaluate: F) -> Result<(), E>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> Result<f64, E>,
{
    for i in 0..swarm.positions.len() {
        let r1: f64 = rng.random();
        let r2: f64 = rng.random();
        let x = &mut swarm.positions[i];
        let v = &mut swarm.velocities[i];
        for d in 0..x.len() {
            v[d] = swarm.inertia * v[d]
                + swarm.cognitive * r1 * (swarm.personal_best[i][d] - x[d])
                + swarm.social * r2 * (swarm.global_best[d] - x[d]);
            x[d] += v[d];
            if !(0.0..=1.0).contains(&x[d]) {
                x[d] = x[d].clamp(0.0, 1.0);
                v[d] = 0.0;
            }
        }
        let value = evaluate(x)?;
        if value < swarm.personal_value[i] {
            swarm.personal_value[i] = value;
            swarm.personal_best[i].clone_from(x);
        }
    }
    for (p, &v) in swarm.personal_best.iter().zip(&swarm.personal_value) {
        if v < swarm.global_value {
            swarm.global_value = v;
            swarm.global_best.clone_from(p);
        }
    }
    Ok(())
}

pub fn run_pso<R: Rng + ?Sized>(problem: &Problem, config: &PsoConfig, rng: &mut R) -> TrialRecord {
    let d = problem.dimension();
    let n = config.swarm_size.unwrap_or(10 * d).max(1);
    let mut record = TrialRecord::new("pso", problem.spec.name(), d, problem.grid.bits());
    let mut tracker = TrialTracker::new(&problem.optimum, config.eps, config.budget);

    let result: Result<Outcome, Halt> = (|| {
        let mut positions = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            let x: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            values.push(tracker.evaluate(&problem.spec, &x)?);
            positions.push(x);
        }
        let mut swarm = Swarm::at_rest(positions, values, config);
        let mut stalled = 0;
        loop {
            let before = swarm.global_value;
            pso_step(&mut swarm, rng, |x| tracker.evaluate(&problem.spec, x))?;
            record.generations += 1;
            if before - swarm.global_value > config.min_improvement {
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= config.stagnation {
                    return Ok(Outcome::Local);
                }
            }
        }
    })();
    record.outcome = result.unwrap_or_else(outcome_of);
    finish(record, tracker)
}
