use serde::{Deserialize, Serialize};

use super::{Schedule, HOURS_PER_SHIFT, NUM_SHIFTS};
use crate::error::{Error, Result};

/// Problem parameters of one rostering instance.
///
/// Field names match the instance JSON file format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub num_employees: usize,
    pub num_days: usize,
    pub num_shifts: usize,
    pub hours_per_shift: u32,
    /// Lower bound on worked hours per employee.
    pub min_hours: u32,
    /// Upper bound on worked hours per employee.
    pub max_hours: u32,
    /// Longest allowed run of consecutive worked days.
    pub max_consecutive: usize,
    /// Shortest allowed rest block between two worked days.
    pub min_rest: usize,
    pub understaff_weight: u64,
    pub overstaff_weight: u64,
    /// Preferred staffing, `coverage[d][s]`.
    pub coverage: Vec<Vec<u32>>,
    /// Day-off requests, `pref_off[e][d]` in {0, 1}.
    pub pref_off: Vec<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_min_soft: Option<u64>,
}

impl Instance {
    /// Checks dimensions and parameter bounds.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.num_employees == 0 || self.num_days == 0 {
            return bad("instance needs at least one employee and one day".into());
        }
        if self.num_shifts != NUM_SHIFTS || self.hours_per_shift != HOURS_PER_SHIFT {
            return bad(format!(
                "only {NUM_SHIFTS} shifts of {HOURS_PER_SHIFT} hours are supported, got {} of {}",
                self.num_shifts, self.hours_per_shift
            ));
        }
        if self.max_consecutive == 0 || self.min_rest == 0 {
            return bad("max_consecutive and min_rest must be positive".into());
        }
        if self.min_hours > self.max_hours {
            return bad(format!(
                "min_hours {} > max_hours {}",
                self.min_hours, self.max_hours
            ));
        }
        let horizon_hours = self.num_days as u32 * self.hours_per_shift;
        if self.max_hours > horizon_hours {
            return bad(format!(
                "max_hours {} exceeds horizon {horizon_hours}",
                self.max_hours
            ));
        }
        if self.coverage.len() != self.num_days
            || self.coverage.iter().any(|r| r.len() != self.num_shifts)
        {
            return bad(format!(
                "coverage must be {}x{}",
                self.num_days, self.num_shifts
            ));
        }
        if self.pref_off.len() != self.num_employees
            || self.pref_off.iter().any(|r| r.len() != self.num_days)
        {
            return bad(format!(
                "pref_off must be {}x{}",
                self.num_employees, self.num_days
            ));
        }
        if self.pref_off.iter().flatten().any(|&p| p > 1) {
            return bad("pref_off entries must be 0 or 1".into());
        }
        Ok(())
    }

    /// Errors unless `schedule` is `num_employees × num_days`.
    pub fn check_schedule(&self, schedule: &Schedule) -> Result<()> {
        if schedule.employees() != self.num_employees || schedule.days() != self.num_days {
            return Err(Error::InvalidInput(format!(
                "schedule is {}x{}, instance expects {}x{}",
                schedule.employees(),
                schedule.days(),
                self.num_employees,
                self.num_days
            )));
        }
        Ok(())
    }

    pub fn reference_min_soft(&self) -> Result<u64> {
        self.reference_min_soft
            .ok_or_else(|| Error::Configuration("instance has no reference_min_soft".into()))
    }

    #[inline]
    pub fn pref(&self, e: usize, d: usize) -> u64 {
        u64::from(self.pref_off[e][d])
    }
}
