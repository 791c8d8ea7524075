use rand::Rng;

use super::engine::{Draw, Stop, ThresholdSampler};
use crate::accounting::TrialTracker;
use crate::cma::{DistributionState, TruncatedNormal};
use crate::quantum::{aa_sample, prepare_gaussian_state, prepare_uniform_state, QuantumError, Statevector};
use crate::testbed::{GridValues, Problem};

/// Amplitude amplification on the full statevector.
pub(crate) struct QuantumSampler<'a> {
    values: &'a GridValues,
    lambda: f64,
    cap: u64,
    psi0: Option<Statevector>,
}

impl<'a> QuantumSampler<'a> {
    pub fn new(values: &'a GridValues, lambda: f64, cap: u64) -> Self {
        Self {
            values,
            lambda,
            cap,
            psi0: None,
        }
    }
}

impl ThresholdSampler for QuantumSampler<'_> {
    fn set_uniform(&mut self, problem: &Problem) -> Result<(), Stop> {
        self.psi0 = Some(prepare_uniform_state(problem.grid, self.cap).map_err(|_| Stop::Failed)?);
        Ok(())
    }

    fn set_distribution(&mut self, problem: &Problem, state: &DistributionState) -> Result<(), Stop> {
        let cov = state.covariance();
        let psi0 = prepare_gaussian_state(problem.grid, state.mean.as_slice(), &cov, self.cap).map_err(|_| Stop::Failed)?;
        self.psi0 = Some(psi0);
        Ok(())
    }

    fn draw<R: Rng + ?Sized>(
        &mut self,
        _problem: &Problem,
        theta: f64,
        rng: &mut R,
        tracker: &mut TrialTracker<'_>,
    ) -> Result<Draw, Stop> {
        let psi0 = self.psi0.as_ref().ok_or(Stop::Failed)?;
        match aa_sample(psi0, self.values, theta, self.lambda, rng, tracker, None) {
            Ok(s) => Ok(Draw {
                point: s.point,
                value: s.value,
                attempts: s.attempts,
            }),
            Err(QuantumError::Halted(h)) => Err(Stop::Halt(h)),
            Err(_) => Err(Stop::Failed),
        }
    }
}

/// Classical rejection sampling: uniform grid points, or truncated Gaussian
/// draws snapped to the nearest grid point.
#[derive(Default)]
pub(crate) struct ClassicalSampler {
    dist: Option<TruncatedNormal>,
}

impl ThresholdSampler for ClassicalSampler {
    fn set_uniform(&mut self, _problem: &Problem) -> Result<(), Stop> {
        self.dist = None;
        Ok(())
    }

    fn set_distribution(&mut self, _problem: &Problem, state: &DistributionState) -> Result<(), Stop> {
        self.dist = Some(TruncatedNormal::new(state).map_err(|_| Stop::Failed)?);
        Ok(())
    }

    fn draw<R: Rng + ?Sized>(
        &mut self,
        problem: &Problem,
        theta: f64,
        rng: &mut R,
        tracker: &mut TrialTracker<'_>,
    ) -> Result<Draw, Stop> {
        let grid = problem.grid;
        let mut attempts = 0;
        loop {
            let x = match &self.dist {
                None => grid.index_to_point(rng.random_range(0..grid.total_points())),
                Some(t) => grid.snap(t.sample(rng).as_slice()),
            }
            .map_err(|_| Stop::Failed)?;
            let value = tracker.evaluate(&problem.spec, &x)?;
            attempts += 1;
            if value < theta {
                return Ok(Draw {
                    point: x,
                    value,
                    attempts,
                });
            }
        }
    }
}
