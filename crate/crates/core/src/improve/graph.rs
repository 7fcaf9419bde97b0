use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{
    coverage_denominator, evaluate, for_each_participant, Instance, RowRule, Schedule,
};

/// Length of every node feature vector.
pub const FEATURE_DIM: usize = 17;

/// Offsets of the feature blocks.
pub mod layout {
    /// Node-type code: employee (0, 0), day (0, 1), shift (1, 0).
    pub const TYPE: usize = 0;
    /// Worked hours over `max_hours`, clamped to [0, 2].
    pub const HOURS: usize = 2;
    pub const BELOW_MIN_HOURS: usize = 3;
    pub const ABOVE_MAX_HOURS: usize = 4;
    /// One-hot over rest, morning, afternoon, night.
    pub const CODE: usize = 5;
    pub const NIGHT_MORNING: usize = 9;
    pub const CONSECUTIVE: usize = 10;
    pub const SHORT_REST: usize = 11;
    /// Worked streak ending at this day over `max_consecutive`, clamped to [0, 2].
    pub const WORK_STREAK: usize = 12;
    /// Length of the interior rest block containing this day over `min_rest`, clamped to [0, 2].
    pub const REST_STREAK: usize = 13;
    pub const PREF_OFF: usize = 14;
    /// Normalised understaffing of the day, summed over shifts, clamped to [0, 2].
    pub const UNDERSTAFF: usize = 15;
    /// Normalised overstaffing of the day, summed over shifts, clamped to [0, 2].
    pub const OVERSTAFF: usize = 16;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub employees: usize,
    pub days: usize,
    pub feature_dim: usize,
}

/// Heterogeneous graph of one schedule.
///
/// Shift node `(e, d)` has index `e * days + d`. Each edge list holds the
/// forward pairs first and then the same pairs reversed:
/// `edges_se` is `[shift, employee]` then `[employee, shift]`,
/// `edges_sd` is `[shift, day]` then `[day, shift]`,
/// `edges_ss` links `(e, d)` to `(e, d + 1)` then back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphPayload {
    pub meta: GraphMeta,
    pub employee_feats: Vec<Vec<f64>>,
    pub day_feats: Vec<Vec<f64>>,
    pub shift_feats: Vec<Vec<f64>>,
    pub edges_se: Vec<[usize; 2]>,
    pub edges_sd: Vec<[usize; 2]>,
    pub edges_ss: Vec<[usize; 2]>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        (num / den).clamp(0.0, 2.0)
    } else if num > 0.0 {
        2.0
    } else {
        0.0
    }
}

fn bidirectional(forward: Vec<[usize; 2]>) -> Vec<[usize; 2]> {
    let back: Vec<[usize; 2]> = forward.iter().map(|&[a, b]| [b, a]).collect();
    forward.into_iter().chain(back).collect()
}

pub fn build_graph(schedule: &Schedule, instance: &Instance) -> Result<GraphPayload> {
    let report = evaluate(schedule, instance)?;
    let (e_n, d_n) = (instance.num_employees, instance.num_days);

    let mut employee_feats = Vec::with_capacity(e_n);
    let mut shift_feats = Vec::with_capacity(e_n * d_n);
    for e in 0..e_n {
        let row = schedule.row(e);
        let worked = row.iter().filter(|c| c.is_work()).count() as u32;
        let hours = worked * instance.hours_per_shift;
        let mut f = vec![0.0; FEATURE_DIM];
        f[layout::HOURS] = ratio(f64::from(hours), f64::from(instance.max_hours));
        f[layout::BELOW_MIN_HOURS] = f64::from(u8::from(hours < instance.min_hours));
        f[layout::ABOVE_MAX_HOURS] = f64::from(u8::from(hours > instance.max_hours));
        employee_feats.push(f);

        let mut flags = vec![[false; 3]; d_n];
        for_each_participant(row, instance, |rule, d| {
            let k = match rule {
                RowRule::NightMorning => 0,
                RowRule::Consecutive => 1,
                RowRule::ShortRest => 2,
            };
            flags[d][k] = true;
        });
        let rest_len = interior_rest_lengths(row);
        let mut streak = 0usize;
        for d in 0..d_n {
            streak = if row[d].is_work() { streak + 1 } else { 0 };
            let mut f = vec![0.0; FEATURE_DIM];
            f[layout::TYPE] = 1.0;
            f[layout::CODE + row[d].as_u8() as usize] = 1.0;
            for (k, &on) in flags[d].iter().enumerate() {
                f[layout::NIGHT_MORNING + k] = f64::from(u8::from(on));
            }
            f[layout::WORK_STREAK] = ratio(streak as f64, instance.max_consecutive as f64);
            f[layout::REST_STREAK] = ratio(rest_len[d] as f64, instance.min_rest as f64);
            f[layout::PREF_OFF] = f64::from(instance.pref_off[e][d]);
            shift_feats.push(f);
        }
    }

    let day_feats = (0..d_n)
        .map(|d| {
            let mut under = 0.0;
            let mut over = 0.0;
            for (s, st) in report.per_day_shift_coverage[d].iter().enumerate() {
                let den = coverage_denominator(instance, d, s);
                under += (st.understaff * instance.understaff_weight) as f64 / den;
                over += (st.overstaff * instance.overstaff_weight) as f64 / den;
            }
            let mut f = vec![0.0; FEATURE_DIM];
            f[layout::TYPE + 1] = 1.0;
            f[layout::UNDERSTAFF] = under.min(2.0);
            f[layout::OVERSTAFF] = over.min(2.0);
            f
        })
        .collect();

    let shift = |e: usize, d: usize| e * d_n + d;
    let se = (0..e_n)
        .flat_map(|e| (0..d_n).map(move |d| [shift(e, d), e]))
        .collect();
    let sd = (0..e_n)
        .flat_map(|e| (0..d_n).map(move |d| [shift(e, d), d]))
        .collect();
    let ss = (0..e_n)
        .flat_map(|e| (0..d_n.saturating_sub(1)).map(move |d| [shift(e, d), shift(e, d + 1)]))
        .collect();

    Ok(GraphPayload {
        meta: GraphMeta {
            employees: e_n,
            days: d_n,
            feature_dim: FEATURE_DIM,
        },
        employee_feats,
        day_feats,
        shift_feats,
        edges_se: bidirectional(se),
        edges_sd: bidirectional(sd),
        edges_ss: bidirectional(ss),
    })
}

/// Length of the rest block at each day when it has worked days on both sides, else 0.
fn interior_rest_lengths(row: &[crate::model::ShiftCode]) -> Vec<usize> {
    let mut out = vec![0; row.len()];
    let mut d = 0;
    while d < row.len() {
        if row[d].is_work() {
            d += 1;
            continue;
        }
        let start = d;
        while d < row.len() && !row[d].is_work() {
            d += 1;
        }
        if start > 0 && d < row.len() {
            out[start..d].iter_mut().for_each(|x| *x = d - start);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ShiftCode;

    #[test]
    fn interior_rest_blocks() {
        let row: Vec<ShiftCode> = [0, 1, 0, 0, 2, 0, 3, 0]
            .iter()
            .map(|&c| ShiftCode::try_from(c).unwrap())
            .collect();
        assert_eq!(interior_rest_lengths(&row), vec![0, 0, 2, 2, 0, 1, 0, 0]);
    }
}
