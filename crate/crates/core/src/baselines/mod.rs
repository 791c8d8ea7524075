//! Classical reference optimizers: particle swarm and basin hopping.

mod hopping;
mod nelder_mead;
mod pso;

pub use hopping::{run_basinhopping, BasinHoppingConfig, HopState};
pub use nelder_mead::{local_minimize, LocalResult, NelderMeadConfig};
pub use pso::{pso_step, run_pso, PsoConfig, Swarm};

use crate::accounting::TrialTracker;
use crate::record::TrialRecord;

pub(crate) fn finish(mut record: TrialRecord, tracker: TrialTracker<'_>) -> TrialRecord {
    let (counter, trace, best, point) = tracker.finish();
    record.set_counts(counter);
    record.best_value = best;
    record.best_point = point;
    record.best_value_trace = trace;
    record
}
