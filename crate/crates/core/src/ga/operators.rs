use rand::seq::SliceRandom;
use rand::Rng;

use super::config::{CrossoverMix, MutationMix};
use crate::model::{cell_penalty_scores, Instance, Schedule};

/// Random chromosomes with every cell uniform over the four codes.
pub fn get_init_population<R: Rng + ?Sized>(
    instance: &Instance,
    pop_size: usize,
    rng: &mut R,
) -> Vec<Schedule> {
    (0..pop_size)
        .map(|_| Schedule::random(instance.num_employees, instance.num_days, rng))
        .collect()
}

/// Draws an index from a probability vector.
pub(crate) fn pick<R: Rng + ?Sized>(mix: &[f64], rng: &mut R) -> usize {
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in mix.iter().enumerate() {
        acc += p;
        if r < acc {
            return i;
        }
    }
    // rounding slack: fall back to the last option with nonzero mass
    mix.iter().rposition(|&p| p > 0.0).unwrap_or(mix.len() - 1)
}

/// Row `i` of `p1` and row `j` of `p2` trade places.
pub fn cx_one_line_at(p1: &Schedule, p2: &Schedule, i: usize, j: usize) -> (Schedule, Schedule) {
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    c1.row_mut(i).copy_from_slice(p2.row(j));
    c2.row_mut(j).copy_from_slice(p1.row(i));
    (c1, c2)
}

pub fn cx_one_line<R: Rng + ?Sized>(
    p1: &Schedule,
    p2: &Schedule,
    rng: &mut R,
) -> (Schedule, Schedule) {
    let i = rng.gen_range(0..p1.employees());
    let j = rng.gen_range(0..p2.employees());
    cx_one_line_at(p1, p2, i, j)
}

/// Swaps `p1[i][a..a+len]` with `p2[j][b..b+len]`.
pub fn cx_segment_at(
    p1: &Schedule,
    p2: &Schedule,
    i: usize,
    j: usize,
    a: usize,
    b: usize,
    len: usize,
) -> (Schedule, Schedule) {
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    c1.row_mut(i)[a..a + len].copy_from_slice(&p2.row(j)[b..b + len]);
    c2.row_mut(j)[b..b + len].copy_from_slice(&p1.row(i)[a..a + len]);
    (c1, c2)
}

pub fn cx_one_line_partially<R: Rng + ?Sized>(
    p1: &Schedule,
    p2: &Schedule,
    rng: &mut R,
) -> (Schedule, Schedule) {
    let days = p1.days();
    let len = rng.gen_range(1..=days);
    let i = rng.gen_range(0..p1.employees());
    let j = rng.gen_range(0..p2.employees());
    let a = rng.gen_range(0..=days - len);
    let b = rng.gen_range(0..=days - len);
    cx_segment_at(p1, p2, i, j, a, b, len)
}

/// Pairs the population at random and recombines each pair with probability `probab`.
///
/// Offspring `2k` and `2k + 1` descend from the `k`-th pair; unrecombined pairs are copied.
pub fn crossover_all<R: Rng + ?Sized>(
    pop: &[Schedule],
    probab: f64,
    mix: &CrossoverMix,
    rng: &mut R,
) -> Vec<Schedule> {
    let mut order: Vec<usize> = (0..pop.len()).collect();
    order.shuffle(rng);
    let mut out = Vec::with_capacity(pop.len());
    for pair in order.chunks_exact(2) {
        let (p1, p2) = (&pop[pair[0]], &pop[pair[1]]);
        if rng.gen::<f64>() < probab {
            let (c1, c2) = match pick(mix, rng) {
                0 => cx_one_line(p1, p2, rng),
                _ => cx_one_line_partially(p1, p2, rng),
            };
            out.push(c1);
            out.push(c2);
        } else {
            out.push(p1.clone());
            out.push(p2.clone());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    Swap,
    Change,
    Penalty,
}

impl MutationKind {
    fn from_index(i: usize) -> Self {
        [
            MutationKind::Swap,
            MutationKind::Change,
            MutationKind::Penalty,
        ][i]
    }
}

pub(crate) fn mutate_kind<R: Rng + ?Sized>(
    ch: &Schedule,
    instance: &Instance,
    kind: MutationKind,
    rng: &mut R,
) -> Schedule {
    let mut out = ch.clone();
    let n = out.cells().len();
    match kind {
        MutationKind::Swap => {
            if n >= 2 {
                let a = rng.gen_range(0..n);
                let mut b = rng.gen_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                out.cells_mut().swap(a, b);
            }
        }
        MutationKind::Change => {
            let a = rng.gen_range(0..n);
            let cells = out.cells_mut();
            cells[a] = cells[a].random_other(rng);
        }
        MutationKind::Penalty => {
            let scores =
                cell_penalty_scores(ch, instance).expect("mutation input must match the instance");
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let ties: Vec<usize> = (0..n)
                .filter(|&k| (scores[k] - max).abs() <= 1e-12)
                .collect();
            let a = ties[rng.gen_range(0..ties.len())];
            let cells = out.cells_mut();
            cells[a] = cells[a].random_other(rng);
        }
    }
    out
}

/// Applies one mutation variant chosen by `mix`; at most two cells change.
pub fn mutate<R: Rng + ?Sized>(
    ch: &Schedule,
    instance: &Instance,
    mix: &MutationMix,
    rng: &mut R,
) -> Schedule {
    let kind = MutationKind::from_index(pick(mix, rng));
    mutate_kind(ch, instance, kind, rng)
}

/// Mutates each offspring with probability `probab`.
pub fn mutation_all<R: Rng + ?Sized>(
    offspring: Vec<Schedule>,
    instance: &Instance,
    probab: f64,
    mix: &MutationMix,
    rng: &mut R,
) -> Vec<Schedule> {
    offspring
        .into_iter()
        .map(|ch| {
            if rng.gen::<f64>() < probab {
                mutate(&ch, instance, mix, rng)
            } else {
                ch
            }
        })
        .collect()
}
