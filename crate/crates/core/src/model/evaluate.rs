use serde::{Deserialize, Serialize};

use super::{Instance, Schedule, ShiftCode, NUM_SHIFTS};
use crate::error::{Error, Result};

/// Under- and over-staffing of one (day, shift).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Staffing {
    pub understaff: u64,
    pub overstaff: u64,
}

/// Decomposed hard and soft penalties of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyReport {
    /// Night shift followed by a morning shift.
    pub c2_count: u64,
    /// Employees whose worked hours fall outside the bounds.
    pub c3_count: u64,
    /// Fully worked windows of `max_consecutive + 1` days.
    pub c4_count: u64,
    /// Interior rest blocks shorter than `min_rest`.
    pub c5_count: u64,
    pub hard_total: u64,
    pub soft_unnormalized: u64,
    pub soft_normalized: f64,
    /// `[d][s]` staffing deviations.
    pub per_day_shift_coverage: Vec<Vec<Staffing>>,
    /// Worked days that were requested off, per employee.
    pub per_employee_pref: Vec<u64>,
}

impl PenaltyReport {
    #[inline]
    pub fn is_feasible(&self) -> bool {
        self.hard_total == 0
    }
}

/// Evaluates every hard constraint instantiation and the objective.
pub fn evaluate(schedule: &Schedule, instance: &Instance) -> Result<PenaltyReport> {
    instance.check_schedule(schedule)?;
    let (e_n, d_n) = (instance.num_employees, instance.num_days);
    let hours = instance.hours_per_shift;

    let mut c2 = 0u64;
    let mut c3 = 0u64;
    let mut c4 = 0u64;
    let mut c5 = 0u64;
    let mut assigned = vec![[0u64; NUM_SHIFTS]; d_n];
    let mut per_employee_pref = vec![0u64; e_n];

    for (e, pref_row) in per_employee_pref.iter_mut().enumerate() {
        let row = schedule.row(e);
        let mut worked = 0u32;
        // length of the current run of worked days
        let mut streak = 0usize;
        // length of the current rest block, and whether a worked day precedes it
        let mut rest_run = 0usize;
        let mut seen_work = false;
        for (d, &code) in row.iter().enumerate() {
            if let Some(s) = code.shift_index() {
                worked += 1;
                assigned[d][s] += 1;
                *pref_row += instance.pref(e, d);
                if d > 0 && row[d - 1] == ShiftCode::Night && code == ShiftCode::Morning {
                    c2 += 1;
                }
                streak += 1;
                if streak > instance.max_consecutive {
                    c4 += 1;
                }
                if seen_work && rest_run > 0 && rest_run < instance.min_rest {
                    c5 += 1;
                }
                rest_run = 0;
                seen_work = true;
            } else {
                streak = 0;
                rest_run += 1;
            }
        }
        let total = worked * hours;
        if total < instance.min_hours || total > instance.max_hours {
            c3 += 1;
        }
    }

    let mut soft = 0u64;
    let mut per_day_shift_coverage = Vec::with_capacity(d_n);
    for (d, counts) in assigned.iter().enumerate() {
        let mut day = Vec::with_capacity(NUM_SHIFTS);
        for (s, &n) in counts.iter().enumerate() {
            let u = u64::from(instance.coverage[d][s]);
            let st = Staffing {
                understaff: u.saturating_sub(n),
                overstaff: n.saturating_sub(u),
            };
            soft += st.understaff * instance.understaff_weight
                + st.overstaff * instance.overstaff_weight;
            day.push(st);
        }
        per_day_shift_coverage.push(day);
    }
    soft += per_employee_pref.iter().sum::<u64>();

    let mut report = PenaltyReport {
        c2_count: c2,
        c3_count: c3,
        c4_count: c4,
        c5_count: c5,
        hard_total: c2 + c3 + c4 + c5,
        soft_unnormalized: soft,
        soft_normalized: 0.0,
        per_day_shift_coverage,
        per_employee_pref,
    };
    report.soft_normalized = normalized_soft(&report, instance);
    Ok(report)
}

/// Hard violations (C2 to C5) of a single employee's row.
pub fn row_hard_violations(row: &[ShiftCode], instance: &Instance) -> u64 {
    let mut count = 0u64;
    let mut worked = 0u32;
    let mut streak = 0usize;
    let mut rest_run = 0usize;
    let mut seen_work = false;
    for (d, &code) in row.iter().enumerate() {
        if code.is_work() {
            worked += 1;
            if d > 0 && row[d - 1] == ShiftCode::Night && code == ShiftCode::Morning {
                count += 1;
            }
            streak += 1;
            if streak > instance.max_consecutive {
                count += 1;
            }
            if seen_work && rest_run > 0 && rest_run < instance.min_rest {
                count += 1;
            }
            rest_run = 0;
            seen_work = true;
        } else {
            streak = 0;
            rest_run += 1;
        }
    }
    let hours = worked * instance.hours_per_shift;
    if hours < instance.min_hours || hours > instance.max_hours {
        count += 1;
    }
    count
}

/// `1 + ` the largest raw coverage penalty attainable at `(d, s)`.
#[inline]
pub fn coverage_denominator(instance: &Instance, d: usize, s: usize) -> f64 {
    let u = u64::from(instance.coverage[d][s]);
    let e = instance.num_employees as u64;
    let worst_under = u * instance.understaff_weight;
    let worst_over = e.saturating_sub(u) * instance.overstaff_weight;
    1.0 + worst_under.max(worst_over) as f64
}

/// Sum of per-(day, shift) and per-employee penalty terms, each scaled into [0, 1).
pub fn normalized_soft(report: &PenaltyReport, instance: &Instance) -> f64 {
    let mut total = 0.0;
    for (d, day) in report.per_day_shift_coverage.iter().enumerate() {
        for (s, st) in day.iter().enumerate() {
            let raw = st.understaff * instance.understaff_weight
                + st.overstaff * instance.overstaff_weight;
            if raw > 0 {
                total += raw as f64 / coverage_denominator(instance, d, s);
            }
        }
    }
    let pref_den = 1.0 + instance.num_days as f64;
    for &p in &report.per_employee_pref {
        if p > 0 {
            total += p as f64 / pref_den;
        }
    }
    total
}

/// Upper-bound constant the fitness is measured against.
pub fn max_fitness(employees: usize, days: usize, num_shifts: usize) -> u64 {
    let (e, d, s) = (employees as u64, days as u64, num_shifts as u64);
    e * d * (s + 1) + s * d + e
}

/// `max_fitness − (hard_total + soft_normalized)`.
pub fn fitness(schedule: &Schedule, instance: &Instance) -> Result<f64> {
    let report = evaluate(schedule, instance)?;
    Ok(fitness_of(&report, instance))
}

#[inline]
pub(crate) fn fitness_of(report: &PenaltyReport, instance: &Instance) -> f64 {
    let max = max_fitness(
        instance.num_employees,
        instance.num_days,
        instance.num_shifts,
    ) as f64;
    max - (report.hard_total as f64 + report.soft_normalized)
}

/// Feasible and matching the instance's certified minimum soft penalty.
pub fn is_optimal(schedule: &Schedule, instance: &Instance) -> Result<bool> {
    let target = instance.reference_min_soft.ok_or_else(|| {
        Error::Configuration("optimality check requires reference_min_soft".into())
    })?;
    let report = evaluate(schedule, instance)?;
    Ok(report.hard_total == 0 && report.soft_unnormalized == target)
}
