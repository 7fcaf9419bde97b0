use crate::error::{Error, Result};
use crate::model::{Instance, ShiftCode};

/// Enumeration is refused when `4^D` exceeds this.
pub const MAX_PATTERN_SPACE: u64 = 1 << 24;

/// A single employee's row that satisfies every per-employee hard constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmployeePattern {
    pub row: Vec<ShiftCode>,
    /// Worked days among the employee's day-off requests.
    pub pref_cost: u64,
}

fn check_capacity(instance: &Instance) -> Result<()> {
    let space = 4u64
        .checked_pow(instance.num_days as u32)
        .unwrap_or(u64::MAX);
    if space > MAX_PATTERN_SPACE {
        return Err(Error::Capacity(format!(
            "{} days give 4^{} rows, limit is 2^24",
            instance.num_days, instance.num_days
        )));
    }
    Ok(())
}

struct Walk<'a> {
    instance: &'a Instance,
    row: Vec<ShiftCode>,
    out: Vec<Vec<ShiftCode>>,
}

impl Walk<'_> {
    /// `streak`: worked days ending at the previous day. `rest`: rest days ending
    /// there, counted only once some day has been worked (so the block is interior
    /// if work follows). `hours`: hours so far.
    fn step(&mut self, day: usize, streak: usize, rest: usize, seen_work: bool, hours: u32) {
        let inst = self.instance;
        let d_n = inst.num_days;
        if day == d_n {
            if hours >= inst.min_hours && hours <= inst.max_hours {
                self.out.push(self.row.clone());
            }
            return;
        }
        let remaining = (d_n - day) as u32;
        for code in ShiftCode::ALL {
            if code.is_work() {
                let h = hours + inst.hours_per_shift;
                if h > inst.max_hours || streak + 1 > inst.max_consecutive {
                    continue;
                }
                if day > 0 && self.row[day - 1] == ShiftCode::Night && code == ShiftCode::Morning {
                    continue;
                }
                if seen_work && rest > 0 && rest < inst.min_rest {
                    continue;
                }
                self.row.push(code);
                self.step(day + 1, streak + 1, 0, true, h);
                self.row.pop();
            } else {
                // resting today leaves remaining - 1 days to reach the minimum
                if hours + (remaining - 1) * inst.hours_per_shift < inst.min_hours {
                    continue;
                }
                self.row.push(code);
                self.step(
                    day + 1,
                    0,
                    if seen_work { rest + 1 } else { 0 },
                    seen_work,
                    hours,
                );
                self.row.pop();
            }
        }
    }
}

/// Every row satisfying the per-employee constraints, in lexicographic order.
pub fn feasible_rows(instance: &Instance) -> Result<Vec<Vec<ShiftCode>>> {
    check_capacity(instance)?;
    let mut walk = Walk {
        instance,
        row: Vec::with_capacity(instance.num_days),
        out: Vec::new(),
    };
    walk.step(0, 0, 0, false, 0);
    Ok(walk.out)
}

/// Feasible rows for `employee`, sorted by ascending preference cost (stable).
pub fn enumerate_patterns(instance: &Instance, employee: usize) -> Result<Vec<EmployeePattern>> {
    if employee >= instance.num_employees {
        return Err(Error::InvalidInput(format!(
            "employee {employee} out of range"
        )));
    }
    let rows = feasible_rows(instance)?;
    Ok(patterns_for(instance, employee, &rows))
}

pub(crate) fn patterns_for(
    instance: &Instance,
    employee: usize,
    rows: &[Vec<ShiftCode>],
) -> Vec<EmployeePattern> {
    let mut pats: Vec<EmployeePattern> = rows
        .iter()
        .map(|row| EmployeePattern {
            pref_cost: row
                .iter()
                .enumerate()
                .filter(|(_, c)| c.is_work())
                .map(|(d, _)| instance.pref(employee, d))
                .sum(),
            row: row.clone(),
        })
        .collect();
    pats.sort_by_key(|p| p.pref_cost);
    pats
}
