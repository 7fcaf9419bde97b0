use rayon::prelude::*;

use super::ImprovementOperator;
use crate::error::Result;
use crate::model::{cell_penalty_scores, evaluate, Instance, Schedule, ShiftCode};

/// Greedy local repair of the highest-penalty cell.
#[derive(Debug, Clone, Copy, Default)]
pub struct Repair;

pub fn repair_operator() -> Repair {
    Repair
}

/// Up to `E·D` steps; each rewrites the first max-score cell with the code
/// minimising `(hard_total, soft_unnormalized)` and stops when that cell cannot improve.
pub fn repair_schedule(schedule: &Schedule, instance: &Instance) -> Result<Schedule> {
    let mut s = schedule.clone();
    let report = evaluate(&s, instance)?;
    let mut current = (report.hard_total, report.soft_unnormalized);
    for _ in 0..s.cells().len() {
        let scores = cell_penalty_scores(&s, instance)?;
        let mut k = 0;
        for (i, &v) in scores.iter().enumerate() {
            if v > scores[k] {
                k = i;
            }
        }
        let (e, d) = (k / s.days(), k % s.days());
        let original = s.get(e, d);
        let mut best = (current, original);
        for code in ShiftCode::ALL {
            if code == original {
                continue;
            }
            s.set(e, d, code);
            let r = evaluate(&s, instance)?;
            let key = (r.hard_total, r.soft_unnormalized);
            if key < best.0 {
                best = (key, code);
            }
        }
        s.set(e, d, best.1);
        if best.1 == original {
            break;
        }
        current = best.0;
    }
    Ok(s)
}

impl ImprovementOperator for Repair {
    fn improve(&mut self, batch: &[Schedule], instance: &Instance) -> Result<Vec<Schedule>> {
        batch
            .par_iter()
            .map(|s| repair_schedule(s, instance))
            .collect()
    }
}
