//! The per-trial result record shared by every method.
//!
//! Field names are part of the JSON-lines output format and must not change.

use serde::{Deserialize, Serialize};

use crate::accounting::{OracleCounter, TracePoint};
use crate::cma::StateSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Global,
    Local,
    Budget,
}

/// One generation of a distribution-based search, for trace files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub generation: u64,
    /// Empty and absent respectively for GAS, which has no distribution.
    pub mean: Vec<f64>,
    pub sigma: Option<f64>,
    /// Absent for CMA-ES, which has no threshold.
    pub theta: Option<f64>,
    pub accepted_values: Vec<f64>,
    pub quantum_calls: u64,
    pub classical_evals: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: String,
    pub function: String,
    pub dimension: usize,
    pub bits: u32,
    pub trial: u64,
    pub outcome: Outcome,
    /// Set when a numerical failure ended the trial (recorded as `local`).
    pub failure: bool,
    pub quantum_calls: u64,
    pub classical_evals: u64,
    /// `quantum_calls + classical_evals`; the count every metric uses.
    pub oracle_calls: u64,
    pub generations: u64,
    /// `null` when nothing was evaluated.
    #[serde(with = "infinite_as_null")]
    pub best_value: f64,
    pub best_point: Vec<f64>,
    pub best_value_trace: Vec<TracePoint>,
    pub final_state: Option<StateSnapshot>,
    /// Classical surrogates only: the estimated amplitude-amplification cost.
    pub estimated_quantum_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generation_trace: Vec<GenerationTrace>,
}

impl TrialRecord {
    pub(crate) fn new(method: &str, function: &str, dimension: usize, bits: u32) -> Self {
        Self {
            method: method.to_string(),
            function: function.to_string(),
            dimension,
            bits,
            trial: 0,
            outcome: Outcome::Budget,
            failure: false,
            quantum_calls: 0,
            classical_evals: 0,
            oracle_calls: 0,
            generations: 0,
            best_value: f64::INFINITY,
            best_point: Vec::new(),
            best_value_trace: Vec::new(),
            final_state: None,
            estimated_quantum_cost: None,
            generation_trace: Vec::new(),
        }
    }

    pub(crate) fn set_counts(&mut self, counter: OracleCounter) {
        self.quantum_calls = counter.quantum_calls;
        self.classical_evals = counter.classical_evals;
        self.oracle_calls = counter.combined();
    }

    pub fn is_global(&self) -> bool {
        self.outcome == Outcome::Global
    }

    /// Parses one JSON-lines record.
    pub fn from_json_line(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trial records always serialize")
    }
}

mod infinite_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
