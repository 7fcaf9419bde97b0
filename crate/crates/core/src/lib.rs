//! Staff rostering with a multi-modal genetic algorithm.
//!
//! The crate is organised around the rostering model:
//!
//! * [`model`] holds instances, schedules, constraint evaluation and fitness.
//! * [`instance_gen`] generates random instances and improvement datasets.
//! * [`oracle`] certifies optima on tiny instances and round-trips LP files.
//! * [`ga`] is the probabilistic-crowding genetic algorithm.
//! * [`improve`] defines batch improvement operators, the heterogeneous graph
//!   encoding and the client for an out-of-process neural operator.
//! * [`stats`] and [`harness`] run experiment grids and summarise them.

pub mod error;
pub mod ga;
pub mod harness;
pub mod improve;
pub mod instance_gen;
pub mod io;
pub mod model;
pub mod oracle;
pub mod stats;

pub use error::{Error, Result};
pub use model::{Instance, PenaltyReport, Schedule, ShiftCode};
