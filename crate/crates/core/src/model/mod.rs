//! The rostering model: data types, hard-constraint and objective
//! evaluation, penalty normalisation, fitness and per-cell attribution.

mod attribution;
mod evaluate;
mod instance;
mod schedule;

pub use attribution::cell_penalty_scores;
pub(crate) use attribution::{for_each_participant, RowRule};
pub(crate) use evaluate::fitness_of;
pub use evaluate::{
    coverage_denominator, evaluate, fitness, is_optimal, max_fitness, normalized_soft,
    row_hard_violations, PenaltyReport, Staffing,
};
pub use instance::Instance;
pub use schedule::{Schedule, ShiftCode};

/// Number of working shifts per day (morning, afternoon, night).
pub const NUM_SHIFTS: usize = 3;

/// Length of every shift in hours.
pub const HOURS_PER_SHIFT: u32 = 8;
