//! Benchmark functions, the unit-cube scaling, the fixed-point grid and
//! global-optimum bookkeeping.

mod functions;
mod grid;
mod optimum;

use thiserror::Error;

pub use functions::{
    ackley, alpine01, alpine02, deflected_corrugated_spring, griewank, objective, rastrigin,
    registry, schwefel, styblinski_tang, wavy, FunctionDescriptor, ObjectiveSpec, Structure,
    FUNCTION_NAMES,
};
pub use grid::{Grid, MAX_INDEX_BITS};
pub use optimum::{
    coordinatewise_optimum, is_global_hit, locate_global_optimum, GridValues, OptimumRecord,
    Problem, DEFAULT_SCAN_CAP,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TestbedError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("index {index} out of range for {size} points")]
    IndexOutOfRange { index: u64, size: u64 },
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("grid of {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: u64, cap: u64 },
}
