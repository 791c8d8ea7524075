use rand::Rng;
use serde::{Deserialize, Serialize};

use super::statevector::{measure, rotate_in_place, Statevector};
use super::QuantumError;
use crate::accounting::OracleLedger;
use crate::testbed::GridValues;

pub const DEFAULT_GROWTH: f64 = 6.0 / 5.0;

/// One measurement inside [`aa_sample`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AaEvent {
    pub iteration: u64,
    pub rotations: u64,
    pub index: u64,
    pub value: f64,
    pub accepted: bool,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptedSample {
    pub index: u64,
    pub point: Vec<f64>,
    pub value: f64,
    /// Rotations spent on this sample, rejected attempts included.
    pub rotations: u64,
    pub attempts: u64,
}

/// Draws one point with value strictly below `theta` by amplitude
/// amplification with a randomized, geometrically growing rotation count.
///
/// Rotations are charged to the ledger before they are simulated and each
/// measured point costs one classical evaluation. The ledger decides when
/// to stop: a global hit or an exhausted budget comes back as
/// [`QuantumError::Halted`].
pub fn aa_sample<R, L>(
    psi0: &Statevector,
    values: &GridValues,
    theta: f64,
    lambda: f64,
    rng: &mut R,
    ledger: &mut L,
    mut trace: Option<&mut Vec<AaEvent>>,
) -> Result<AcceptedSample, QuantumError>
where
    R: Rng + ?Sized,
    L: OracleLedger + ?Sized,
{
    if !(lambda > 1.0 && lambda < 4.0 / 3.0) {
        return Err(QuantumError::InvalidRate(lambda));
    }
    if psi0.grid() != values.grid() {
        return Err(QuantumError::GridMismatch);
    }
    let grid = psi0.grid();
    let mut m = 1.0f64;
    let mut spent = 0u64;
    let mut attempts = 0u64;
    let mut work = psi0.clone();
    loop {
        let r = rng.random_range(0..=m.floor() as u64);
        ledger.charge_rotations(r)?;
        spent += r;
        attempts += 1;
        let index = if r == 0 {
            measure(psi0, rng)
        } else {
            work.clone_from(psi0);
            rotate_in_place(&mut work, psi0, values, theta, r)?;
            measure(&work, rng)
        };
        let value = values.get(index);
        let point = grid.index_to_point(index).expect("measured index lies on the grid");
        let accepted = value < theta;
        if let Some(t) = trace.as_deref_mut() {
            t.push(AaEvent {
                iteration: attempts,
                rotations: r,
                index,
                value,
                accepted,
                theta,
            });
        }
        ledger.charge_evaluation(&point, value)?;
        if accepted {
            return Ok(AcceptedSample {
                index,
                point,
                value,
                rotations: spent,
                attempts,
            });
        }
        m *= lambda;
    }
}
