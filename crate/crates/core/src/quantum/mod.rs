//! Exact amplitude-level simulation of amplitude amplification on a grid.

mod amplify;
mod statevector;

pub use amplify::{aa_sample, AaEvent, AcceptedSample, DEFAULT_GROWTH};
pub use statevector::{
    decode_amplitudes, grover_power, measure, oracle_sign_flip, prepare_gaussian_state, prepare_uniform_state,
    reflect_about_initial, Statevector, COVARIANCE_FLOOR, DEFAULT_MAX_AMPLITUDES, NORM_TOLERANCE,
};

use crate::accounting::Halt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuantumError {
    #[error("statevector of {amplitudes} amplitudes exceeds the cap of {cap}")]
    TooLarge { amplitudes: u64, cap: u64 },
    #[error("expected {expected} amplitudes, got {got}")]
    Length { expected: u64, got: u64 },
    #[error("dump truncated: needed {needed} bytes, got {got}")]
    Truncated { needed: u64, got: u64 },
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("norm drifted to {0}")]
    NormDrift(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("growth rate {0} outside (1, 4/3)")]
    InvalidRate(f64),
    #[error("state and value table live on different grids")]
    GridMismatch,
    #[error("sampling halted: {0:?}")]
    Halted(Halt),
}

impl From<Halt> for QuantumError {
    fn from(h: Halt) -> Self {
        QuantumError::Halted(h)
    }
}
