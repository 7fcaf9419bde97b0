use super::evaluate::{coverage_denominator, PenaltyReport};
use super::{Instance, Schedule, ShiftCode};
use crate::error::Result;

/// Per-cell share of the penalties, row-major `E × D`.
///
/// Hard violations give 1.0 to every cell taking part in the violated
/// instantiation. Hour-bound violations are spread over the worked cells
/// (too many hours) or rest cells (too few). Preference and overstaffing
/// shares of the normalised soft penalty go to the cells causing them.
/// Understaffing is left unattributed.
pub fn cell_penalty_scores(schedule: &Schedule, instance: &Instance) -> Result<Vec<f64>> {
    let report = super::evaluate(schedule, instance)?;
    Ok(scores_from_report(schedule, instance, &report))
}

pub(crate) fn scores_from_report(
    schedule: &Schedule,
    instance: &Instance,
    report: &PenaltyReport,
) -> Vec<f64> {
    let (e_n, d_n) = (instance.num_employees, instance.num_days);
    let mut scores = vec![0.0; e_n * d_n];
    let pref_den = 1.0 + d_n as f64;

    // assigned counts are needed to split overstaffing among the culprits
    let mut assigned = vec![[0u32; 3]; d_n];
    for e in 0..e_n {
        for d in 0..d_n {
            if let Some(s) = schedule.get(e, d).shift_index() {
                assigned[d][s] += 1;
            }
        }
    }

    for e in 0..e_n {
        let row = schedule.row(e);
        let base = e * d_n;
        let worked_days = row.iter().filter(|c| c.is_work()).count();
        let rest_days = d_n - worked_days;

        for_each_participant(row, instance, |_, d| scores[base + d] += 1.0);

        let hours = worked_days as u32 * instance.hours_per_shift;
        if hours > instance.max_hours && worked_days > 0 {
            let share = 1.0 / worked_days as f64;
            for d in 0..d_n {
                if row[d].is_work() {
                    scores[base + d] += share;
                }
            }
        } else if hours < instance.min_hours && rest_days > 0 {
            let share = 1.0 / rest_days as f64;
            for d in 0..d_n {
                if !row[d].is_work() {
                    scores[base + d] += share;
                }
            }
        }

        for d in 0..d_n {
            let Some(s) = row[d].shift_index() else {
                continue;
            };
            if instance.pref_off[e][d] == 1 {
                scores[base + d] += 1.0 / pref_den;
            }
            let over = report.per_day_shift_coverage[d][s].overstaff;
            if over > 0 {
                let term = (over * instance.overstaff_weight) as f64
                    / coverage_denominator(instance, d, s);
                scores[base + d] += term / f64::from(assigned[d][s]);
            }
        }
    }
    scores
}

/// Sequential-rule violations in a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RowRule {
    NightMorning,
    Consecutive,
    ShortRest,
}

/// Calls `f` once per cell of every violated night-morning, consecutive-work
/// and short-rest instantiation in `row`.
pub(crate) fn for_each_participant(
    row: &[ShiftCode],
    instance: &Instance,
    mut f: impl FnMut(RowRule, usize),
) {
    let d_n = row.len();
    let cmax = instance.max_consecutive;
    for d in 0..d_n.saturating_sub(1) {
        if row[d] == ShiftCode::Night && row[d + 1] == ShiftCode::Morning {
            f(RowRule::NightMorning, d);
            f(RowRule::NightMorning, d + 1);
        }
    }
    if d_n > cmax {
        for t in 0..d_n - cmax {
            if row[t..=t + cmax].iter().all(|c| c.is_work()) {
                (t..=t + cmax).for_each(|d| f(RowRule::Consecutive, d));
            }
        }
    }
    // a violated rest instantiation is work at d, rest on d+1..=d+t, work at d+t+1
    for t in 1..instance.min_rest {
        if d_n < t + 2 {
            break;
        }
        for d in 0..d_n - t - 1 {
            if row[d].is_work()
                && row[d + t + 1].is_work()
                && row[d + 1..=d + t].iter().all(|c| !c.is_work())
            {
                (d..=d + t + 1).for_each(|j| f(RowRule::ShortRest, j));
            }
        }
    }
}
