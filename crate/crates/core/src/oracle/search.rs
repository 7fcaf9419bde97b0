use std::collections::HashMap;

use super::patterns::feasible_rows;
use crate::error::{Error, Result};
use crate::model::{Instance, Schedule, NUM_SHIFTS};

/// Largest workforce [`solve_exact`] accepts.
pub const MAX_EXACT_EMPLOYEES: usize = 8;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub schedule: Schedule,
    pub min_soft: u64,
    /// State transitions examined.
    pub node_count: u64,
}

/// Packs per-(day, shift) head counts, each capped at its coverage target.
struct Coverage {
    radix: Vec<u64>,
    mul: Vec<u64>,
}

impl Coverage {
    fn new(instance: &Instance) -> Result<Self> {
        let radix: Vec<u64> = instance
            .coverage
            .iter()
            .flatten()
            .map(|&u| u64::from(u) + 1)
            .collect();
        let mut mul = Vec::with_capacity(radix.len());
        let mut m: u64 = 1;
        for &r in &radix {
            mul.push(m);
            m = m.checked_mul(r).ok_or_else(|| {
                Error::Capacity("coverage state space does not fit in 64 bits".into())
            })?;
        }
        Ok(Coverage { radix, mul })
    }

    fn digit(&self, key: u64, i: usize) -> u64 {
        key / self.mul[i] % self.radix[i]
    }

    /// Adds one worker to each listed slot; returns the new key and overstaffing count.
    fn add(&self, mut key: u64, slots: &[usize]) -> (u64, u64) {
        let mut over = 0;
        for &i in slots {
            if self.digit(key, i) + 1 < self.radix[i] {
                key += self.mul[i];
            } else {
                over += 1;
            }
        }
        (key, over)
    }

    fn shortfall(&self, key: u64) -> u64 {
        (0..self.radix.len())
            .map(|i| self.radix[i] - 1 - self.digit(key, i))
            .sum()
    }
}

/// Exact minimum over one feasible row per employee.
///
/// Dynamic programming over employees with the capped coverage vector as state:
/// understaffing depends only on the capped counts, and overstaffing beyond the
/// cap is charged as each extra worker is added. `budget` caps the number of
/// state transitions.
pub fn solve_exact(instance: &Instance, budget: u64) -> Result<OracleResult> {
    instance.validate()?;
    if instance.num_employees > MAX_EXACT_EMPLOYEES {
        return Err(Error::Capacity(format!(
            "exact search supports at most {MAX_EXACT_EMPLOYEES} employees, got {}",
            instance.num_employees
        )));
    }
    let rows = feasible_rows(instance)?;
    if rows.is_empty() {
        return Err(Error::InfeasibleInstance(
            "no row satisfies the per-employee hard constraints".into(),
        ));
    }
    let cov = Coverage::new(instance)?;
    let slots: Vec<Vec<usize>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter_map(|(d, c)| c.shift_index().map(|s| d * NUM_SHIFTS + s))
                .collect()
        })
        .collect();

    // layers[k][key] = (cost, previous key, row index) after k + 1 employees
    let mut layers: Vec<HashMap<u64, (u64, u64, usize)>> = Vec::new();
    let mut frontier: Vec<(u64, u64)> = vec![(0, 0)];
    let mut nodes: u64 = 0;
    for e in 0..instance.num_employees {
        let pref: Vec<u64> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(d, c)| c.is_work() && instance.pref(e, *d) > 0)
                    .count() as u64
            })
            .collect();
        let mut next: HashMap<u64, (u64, u64, usize)> = HashMap::new();
        for &(key, cost) in &frontier {
            for (r, sl) in slots.iter().enumerate() {
                nodes += 1;
                if nodes > budget {
                    return Err(Error::Capacity(format!(
                        "transition budget {budget} exhausted"
                    )));
                }
                let (nk, over) = cov.add(key, sl);
                let c = cost + pref[r] + over * instance.overstaff_weight;
                let entry = next.entry(nk).or_insert((u64::MAX, 0, 0));
                if (c, key, r) < *entry {
                    *entry = (c, key, r);
                }
            }
        }
        frontier = next.iter().map(|(&k, &(c, _, _))| (k, c)).collect();
        frontier.sort_unstable();
        layers.push(next);
    }

    let (mut key, min_soft) = frontier
        .iter()
        .map(|&(k, c)| (k, c + cov.shortfall(k) * instance.understaff_weight))
        .min_by_key(|&(k, c)| (c, k))
        .expect("at least one feasible row");
    let mut schedule = Schedule::new(
        instance.num_employees,
        instance.num_days,
        Default::default(),
    );
    for e in (0..instance.num_employees).rev() {
        let (_, prev, r) = layers[e][&key];
        schedule.row_mut(e).copy_from_slice(&rows[r]);
        key = prev;
    }
    Ok(OracleResult {
        schedule,
        min_soft,
        node_count: nodes,
    })
}
