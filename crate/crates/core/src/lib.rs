//! Simulation and benchmarking of quantum-assisted continuous optimization.
//!
//! The crate simulates amplitude amplification exactly on a fixed-point
//! grid and builds two optimizers on top of it: Grover adaptive search with a
//! uniform initial state, and QuADS, which prepares a Gaussian initial state
//! and adapts it with the CMA-ES update. Classical baselines, classical
//! surrogates that estimate quantum oracle cost in high dimension, and the
//! oracle-call metrics used to compare all of them live alongside.
//!
//! Module map:
//!
//! - [`testbed`]: benchmark functions, the grid, optimum location
//! - [`cma`]: CMA-ES state, update and optimizer
//! - [`quantum`]: statevector operations and amplitude-amplification sampling
//! - [`optimizers`]: GAS and QuADS
//! - [`estimator`]: classical surrogates and oracle-count estimates
//! - [`baselines`]: particle swarm and basin hopping
//! - [`metrics`]: expected-cost aggregation, bootstrap intervals, scaling fits

pub mod accounting;
pub mod baselines;
pub mod cma;
pub mod estimator;
pub mod metrics;
pub mod optimizers;
pub mod quantum;
pub mod record;
pub mod rng;
pub mod testbed;

pub use accounting::{Halt, OracleCounter, OracleLedger, TracePoint, TrialTracker};
pub use record::{GenerationTrace, Outcome, TrialRecord};
