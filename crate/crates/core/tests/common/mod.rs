//! Test-only oracles. Nothing here calls into the code paths it checks.
#![allow(dead_code)]

use rand::Rng;
use roster_core::model::evaluate;
use roster_core::{Instance, Schedule};

/// Indicator x[e][d][s] (s in 0..3 over working shifts), built from raw codes.
pub fn indicators(s: &Schedule) -> Vec<Vec<[u64; 3]>> {
    s.to_rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|&c| {
                    let mut x = [0u64; 3];
                    if c > 0 {
                        x[c as usize - 1] = 1;
                    }
                    x
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveReport {
    pub c2: u64,
    pub c3: u64,
    pub c4: u64,
    pub c5: u64,
    pub y: Vec<[u64; 3]>,
    pub z: Vec<[u64; 3]>,
    pub pref: Vec<u64>,
    pub objective: u64,
}

/// Loops each constraint family over its literal 1-based index ranges.
pub fn naive_check(s: &Schedule, inst: &Instance) -> NaiveReport {
    let x = indicators(s);
    let e_n = inst.num_employees;
    let d_n = inst.num_days as i64;
    let w = |e: usize, d: i64| -> i64 { x[e][(d - 1) as usize].iter().sum::<u64>() as i64 };

    let (mut c2, mut c3, mut c4, mut c5) = (0, 0, 0, 0);
    for e in 0..e_n {
        // C2: x[e][d][night] + x[e][d+1][morning] <= 1, d = 1..D-1
        for d in 1..d_n {
            if x[e][(d - 1) as usize][2] + x[e][d as usize][0] > 1 {
                c2 += 1;
            }
        }
        // C3
        let hours: i64 = (1..=d_n).map(|d| 8 * w(e, d)).sum();
        if hours < inst.min_hours as i64 || hours > inst.max_hours as i64 {
            c3 += 1;
        }
        // C4: t = 1..D-cmax, sum_{d=t}^{t+cmax} <= cmax
        let cmax = inst.max_consecutive as i64;
        for t in 1..=(d_n - cmax) {
            let sum: i64 = (t..=t + cmax).map(|d| w(e, d)).sum();
            if sum > cmax {
                c4 += 1;
            }
        }
        // C5: t = 1..omin-1, d = 1..D-(t+1)
        let omin = inst.min_rest as i64;
        for t in 1..omin {
            for d in 1..=(d_n - (t + 1)) {
                let lhs = (1 - w(e, d))
                    + (d + 1..=d + t).map(|j| w(e, j)).sum::<i64>()
                    + (1 - w(e, d + t + 1));
                if lhs <= 0 {
                    c5 += 1;
                }
            }
        }
    }

    let mut y = vec![[0u64; 3]; d_n as usize];
    let mut z = vec![[0u64; 3]; d_n as usize];
    let mut objective = 0u64;
    for d in 0..d_n as usize {
        for sh in 0..3 {
            let n: i64 = (0..e_n).map(|e| x[e][d][sh] as i64).sum();
            let u = inst.coverage[d][sh] as i64;
            y[d][sh] = (u - n).max(0) as u64;
            z[d][sh] = (n - u).max(0) as u64;
            objective += y[d][sh] * inst.understaff_weight + z[d][sh] * inst.overstaff_weight;
        }
    }
    let mut pref = vec![0u64; e_n];
    for e in 0..e_n {
        for d in 0..d_n as usize {
            for sh in 0..3 {
                pref[e] += inst.pref_off[e][d] as u64 * x[e][d][sh];
            }
        }
        objective += pref[e];
    }
    NaiveReport {
        c2,
        c3,
        c4,
        c5,
        y,
        z,
        pref,
        objective,
    }
}

/// Instance with every parameter drawn at random, for oracle sweeps.
pub fn random_instance<R: Rng>(rng: &mut R, max_e: usize, max_d: usize) -> Instance {
    let e = rng.gen_range(1..=max_e);
    let d = rng.gen_range(1..=max_d);
    let horizon = 8 * d as u32;
    let a = 8 * rng.gen_range(0..=d as u32);
    let b = 8 * rng.gen_range(0..=d as u32);
    let (min_hours, max_hours) = (a.min(b), a.max(b).min(horizon));
    Instance {
        num_employees: e,
        num_days: d,
        num_shifts: 3,
        hours_per_shift: 8,
        min_hours,
        max_hours,
        max_consecutive: rng.gen_range(1..=d.max(1) + 1),
        min_rest: rng.gen_range(1..=3),
        understaff_weight: rng.gen_range(0..=100),
        overstaff_weight: rng.gen_range(0..=5),
        coverage: (0..d)
            .map(|_| (0..3).map(|_| rng.gen_range(0..=e as u32)).collect())
            .collect(),
        pref_off: (0..e)
            .map(|_| (0..d).map(|_| rng.gen_range(0..=1)).collect())
            .collect(),
        reference_min_soft: None,
    }
}

/// Field-by-field comparison of evaluate against the literal checker.
pub fn assert_matches_naive(s: &Schedule, inst: &Instance) {
    let r = evaluate(s, inst).unwrap();
    let n = naive_check(s, inst);
    assert_eq!(
        (r.c2_count, r.c3_count, r.c4_count, r.c5_count),
        (n.c2, n.c3, n.c4, n.c5),
        "{s:?}"
    );
    assert_eq!(r.hard_total, n.c2 + n.c3 + n.c4 + n.c5);
    assert_eq!(r.soft_unnormalized, n.objective);
    assert_eq!(r.per_employee_pref, n.pref);
    for d in 0..inst.num_days {
        for sh in 0..3 {
            let st = r.per_day_shift_coverage[d][sh];
            assert_eq!((st.understaff, st.overstaff), (n.y[d][sh], n.z[d][sh]));
        }
    }
}

/// Every 4^D row, filtered by the literal single-employee constraint loops.
pub fn brute_force_rows(inst: &Instance) -> Vec<Vec<u8>> {
    let mut one = inst.clone();
    one.num_employees = 1;
    one.pref_off = vec![vec![0; inst.num_days]];
    let mut out = Vec::new();
    for code in 0..4u32.pow(inst.num_days as u32) {
        let mut c = code;
        let row: Vec<u8> = (0..inst.num_days)
            .map(|_| {
                let v = (c % 4) as u8;
                c /= 4;
                v
            })
            .collect();
        let s = Schedule::from_rows(std::slice::from_ref(&row)).unwrap();
        let n = naive_check(&s, &one);
        if n.c2 + n.c3 + n.c4 + n.c5 == 0 {
            out.push(row);
        }
    }
    out.sort();
    out
}

/// Minimum objective over the full cross product of feasible rows.
pub fn cross_product_min(inst: &Instance) -> Option<u64> {
    let rows = brute_force_rows(inst);
    if rows.is_empty() {
        return None;
    }
    let d_n = inst.num_days;
    let counts: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| indicators(&Schedule::from_rows(std::slice::from_ref(r)).unwrap())[0].concat())
        .collect();
    let pref: Vec<Vec<u64>> = (0..inst.num_employees)
        .map(|e| {
            rows.iter()
                .map(|r| {
                    (0..d_n)
                        .map(|d| inst.pref_off[e][d] as u64 * u64::from(r[d] > 0))
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut best = u64::MAX;
    let mut acc = vec![0u64; 3 * d_n];
    descend(inst, &counts, &pref, 0, 0, &mut acc, &mut best);
    Some(best)
}

fn descend(
    inst: &Instance,
    counts: &[Vec<u64>],
    pref: &[Vec<u64>],
    e: usize,
    pref_sum: u64,
    acc: &mut [u64],
    best: &mut u64,
) {
    if e == inst.num_employees {
        let mut obj = pref_sum;
        for (k, &n) in acc.iter().enumerate() {
            let u = inst.coverage[k / 3][k % 3] as u64;
            obj += u.saturating_sub(n) * inst.understaff_weight
                + n.saturating_sub(u) * inst.overstaff_weight;
        }
        *best = (*best).min(obj);
        return;
    }
    for (r, c) in counts.iter().enumerate() {
        acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        descend(inst, counts, pref, e + 1, pref_sum + pref[e][r], acc, best);
        acc.iter_mut().zip(c).for_each(|(a, b)| *a -= b);
    }
}
