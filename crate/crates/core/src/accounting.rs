//! Oracle-call bookkeeping shared by every optimizer.
//!
//! Quantum methods pay one quantum call per sign-flip application and one
//! classical evaluation per measured candidate. Classical methods pay only
//! classical evaluations. Every evaluated point is checked against the
//! global-hit ball, and the budget applies to the combined count.

use serde::{Deserialize, Serialize};

use crate::testbed::{is_global_hit, ObjectiveSpec, OptimumRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCounter {
    pub quantum_calls: u64,
    pub classical_evals: u64,
}

impl OracleCounter {
    pub fn combined(&self) -> u64 {
        self.quantum_calls + self.classical_evals
    }
}

/// Why a trial stopped early from inside a sampling routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Halt {
    /// An evaluated point fell inside the global-hit ball.
    GlobalHit,
    /// The combined oracle count went past the budget.
    BudgetExhausted,
}

/// Receives every charge made by a sampling routine and may stop it.
pub trait OracleLedger {
    fn charge_rotations(&mut self, rotations: u64) -> Result<(), Halt>;
    /// Charges one evaluation of `value` at the scaled point `x`.
    fn charge_evaluation(&mut self, x: &[f64], value: f64) -> Result<(), Halt>;
    fn counter(&self) -> OracleCounter;
}

/// Budget-only ledger: counts, never reports hits.
#[derive(Debug, Clone, Default)]
pub struct BudgetLedger {
    pub counter: OracleCounter,
    pub budget: u64,
}

impl BudgetLedger {
    pub fn new(budget: u64) -> Self {
        Self {
            counter: OracleCounter::default(),
            budget,
        }
    }

    fn check(&self) -> Result<(), Halt> {
        if self.counter.combined() > self.budget {
            Err(Halt::BudgetExhausted)
        } else {
            Ok(())
        }
    }
}

impl OracleLedger for BudgetLedger {
    fn charge_rotations(&mut self, rotations: u64) -> Result<(), Halt> {
        self.counter.quantum_calls += rotations;
        self.check()
    }

    fn charge_evaluation(&mut self, _x: &[f64], _value: f64) -> Result<(), Halt> {
        self.counter.classical_evals += 1;
        self.check()
    }

    fn counter(&self) -> OracleCounter {
        self.counter
    }
}

/// One point of a best-so-far trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub calls: u64,
    pub value: f64,
}

/// Full per-trial ledger: counters, hit detection, budget and best-so-far trace.
#[derive(Debug, Clone)]
pub struct TrialTracker<'a> {
    optimum: &'a OptimumRecord,
    eps: f64,
    budget: u64,
    counter: OracleCounter,
    best_value: f64,
    best_point: Vec<f64>,
    trace: Vec<TracePoint>,
    hit: bool,
}

impl<'a> TrialTracker<'a> {
    pub fn new(optimum: &'a OptimumRecord, eps: f64, budget: u64) -> Self {
        Self {
            optimum,
            eps,
            budget,
            counter: OracleCounter::default(),
            best_value: f64::INFINITY,
            best_point: Vec::new(),
            trace: Vec::new(),
            hit: false,
        }
    }

    /// Evaluates `spec` at `x` and charges it.
    pub fn evaluate(&mut self, spec: &ObjectiveSpec, x: &[f64]) -> Result<f64, Halt> {
        let value = spec.evaluate(x);
        self.charge_evaluation(x, value).map(|()| value)
    }

    pub fn best_value(&self) -> f64 {
        self.best_value
    }

    pub fn best_point(&self) -> &[f64] {
        &self.best_point
    }

    pub fn found_global(&self) -> bool {
        self.hit
    }

    /// Closes the trace with a final point at the current count.
    pub fn finish(mut self) -> (OracleCounter, Vec<TracePoint>, f64, Vec<f64>) {
        if self.best_value.is_finite() {
            let calls = self.counter.combined();
            if self.trace.last().map(|p| p.calls) != Some(calls) {
                self.trace.push(TracePoint {
                    calls,
                    value: self.best_value,
                });
            }
        }
        (self.counter, self.trace, self.best_value, self.best_point)
    }

    fn check_budget(&self) -> Result<(), Halt> {
        if self.counter.combined() > self.budget {
            Err(Halt::BudgetExhausted)
        } else {
            Ok(())
        }
    }
}

impl OracleLedger for TrialTracker<'_> {
    fn charge_rotations(&mut self, rotations: u64) -> Result<(), Halt> {
        self.counter.quantum_calls += rotations;
        self.check_budget()
    }

    fn charge_evaluation(&mut self, x: &[f64], value: f64) -> Result<(), Halt> {
        self.counter.classical_evals += 1;
        if value < self.best_value {
            self.best_value = value;
            self.best_point.clear();
            self.best_point.extend_from_slice(x);
            self.trace.push(TracePoint {
                calls: self.counter.combined(),
                value,
            });
        }
        if is_global_hit(x, self.optimum, self.eps) {
            self.hit = true;
            return Err(Halt::GlobalHit);
        }
        self.check_budget()
    }

    fn counter(&self) -> OracleCounter {
        self.counter
    }
}
