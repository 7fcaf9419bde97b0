//! Batch improvement operators applied to GA offspring, the heterogeneous
//! graph encoding of a schedule and the client for an external neural operator.

mod graph;
mod neural;
pub mod protocol;
mod repair;

pub use graph::{build_graph, layout, GraphMeta, GraphPayload, FEATURE_DIM};
pub use neural::{neural_operator, NeuralOperator};
pub use repair::{repair_operator, repair_schedule, Repair};

use crate::error::Result;
use crate::model::{Instance, Schedule};

/// Maps a batch of schedules to a batch of the same length and order.
pub trait ImprovementOperator {
    fn improve(&mut self, batch: &[Schedule], instance: &Instance) -> Result<Vec<Schedule>>;
}

impl<T: ImprovementOperator + ?Sized> ImprovementOperator for Box<T> {
    fn improve(&mut self, batch: &[Schedule], instance: &Instance) -> Result<Vec<Schedule>> {
        (**self).improve(batch, instance)
    }
}

/// Returns its input unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl ImprovementOperator for Identity {
    fn improve(&mut self, batch: &[Schedule], _instance: &Instance) -> Result<Vec<Schedule>> {
        Ok(batch.to_vec())
    }
}

pub fn identity_operator() -> Identity {
    Identity
}
