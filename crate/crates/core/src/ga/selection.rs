use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    Parent,
    Offspring,
}

/// Decides each matched pair `(i, matching[i])`.
///
/// One uniform draw picks the branch; the roulette branch takes a second draw.
pub fn select_winners<R: Rng + ?Sized>(
    parent_fitness: &[f64],
    offspring_fitness: &[f64],
    matching: &[usize],
    prob_greedy: f64,
    rng: &mut R,
) -> Result<Vec<Winner>> {
    if matching.len() != parent_fitness.len() || offspring_fitness.len() != parent_fitness.len() {
        return Err(Error::ContractViolation(format!(
            "selection over {} parents, {} offspring and a matching of size {}",
            parent_fitness.len(),
            offspring_fitness.len(),
            matching.len()
        )));
    }
    let mut seen = vec![false; matching.len()];
    for &j in matching {
        if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
            return Err(Error::ContractViolation(format!(
                "{matching:?} is not a permutation"
            )));
        }
    }
    if let Some(f) = parent_fitness
        .iter()
        .chain(offspring_fitness)
        .find(|f| !(**f > 0.0))
    {
        return Err(Error::ContractViolation(format!(
            "selection needs positive fitness, got {f}"
        )));
    }
    let mut out = Vec::with_capacity(matching.len());
    for (i, &j) in matching.iter().enumerate() {
        let (fp, fc) = (parent_fitness[i], offspring_fitness[j]);
        let w = if rng.gen::<f64>() < prob_greedy {
            if fc > fp {
                Winner::Offspring
            } else {
                Winner::Parent
            }
        } else if rng.gen::<f64>() < fc / (fc + fp) {
            Winner::Offspring
        } else {
            Winner::Parent
        };
        out.push(w);
    }
    Ok(out)
}

/// Builds the next population; slot `i` holds the winner of parent `i` and its match.
pub fn selection<R: Rng + ?Sized>(
    parents: &[Schedule],
    offspring: &[Schedule],
    matching: &[usize],
    prob_greedy: f64,
    parent_fitness: &[f64],
    offspring_fitness: &[f64],
    rng: &mut R,
) -> Result<Vec<Schedule>> {
    if parents.len() != parent_fitness.len() || offspring.len() != offspring_fitness.len() {
        return Err(Error::ContractViolation(
            "fitness vectors do not match populations".into(),
        ));
    }
    let winners = select_winners(
        parent_fitness,
        offspring_fitness,
        matching,
        prob_greedy,
        rng,
    )?;
    Ok(winners
        .iter()
        .enumerate()
        .map(|(i, w)| match w {
            Winner::Parent => parents[i].clone(),
            Winner::Offspring => offspring[matching[i]].clone(),
        })
        .collect())
}
