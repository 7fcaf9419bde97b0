use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{GaConfig, StopVersion};
use super::matching::{calc_crowding_distances, find_matchings};
use super::operators::{crossover_all, get_init_population, mutation_all};
use super::selection::{select_winners, Winner};
use super::trace::GenerationRecord;
use crate::error::{Error, Result};
use crate::improve::ImprovementOperator;
use crate::model::fitness_of;
use crate::model::{evaluate, Instance, Schedule};

/// Cached evaluation of one chromosome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChromosomeInfo {
    pub fitness: f64,
    pub hard_total: u64,
    pub soft_normalized: f64,
    pub soft_unnormalized: u64,
    /// Feasible at the certified minimum; always false without one.
    pub optimal: bool,
}

impl ChromosomeInfo {
    pub fn of(schedule: &Schedule, instance: &Instance) -> Result<Self> {
        let report = evaluate(schedule, instance)?;
        Ok(ChromosomeInfo {
            fitness: fitness_of(&report, instance),
            hard_total: report.hard_total,
            soft_normalized: report.soft_normalized,
            soft_unnormalized: report.soft_unnormalized,
            optimal: report.hard_total == 0
                && instance.reference_min_soft == Some(report.soft_unnormalized),
        })
    }

    pub fn is_feasible(&self) -> bool {
        self.hard_total == 0
    }
}

fn evaluate_all(pop: &[Schedule], instance: &Instance) -> Result<Vec<ChromosomeInfo>> {
    pop.par_iter()
        .map(|s| ChromosomeInfo::of(s, instance))
        .collect()
}

#[derive(Debug, Clone)]
pub struct PopulationState {
    pub chromosomes: Vec<Schedule>,
    pub info: Vec<ChromosomeInfo>,
    pub best_fitness_so_far: f64,
    pub patience: usize,
    pub prob_greedy: f64,
    pub epoch: usize,
    pub elapsed_seconds: f64,
    /// Longest generation so far, used to avoid starting one that would overrun the wall-time cap.
    pub max_generation_seconds: f64,
}

impl PopulationState {
    pub fn new(chromosomes: Vec<Schedule>, instance: &Instance, cfg: &GaConfig) -> Result<Self> {
        let info = evaluate_all(&chromosomes, instance)?;
        let best = info
            .iter()
            .map(|i| i.fitness)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(PopulationState {
            chromosomes,
            info,
            best_fitness_so_far: best,
            patience: 0,
            prob_greedy: cfg.min_prob_greedy,
            epoch: 0,
            elapsed_seconds: 0.0,
            max_generation_seconds: 0.0,
        })
    }

    pub fn max_fitness(&self) -> f64 {
        self.info
            .iter()
            .map(|i| i.fitness)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn record(&self, crowding: Option<&[u64]>, has_reference: bool) -> GenerationRecord {
        let n = self.info.len() as f64;
        let feasible: Vec<f64> = self
            .info
            .iter()
            .filter(|i| i.is_feasible())
            .map(|i| i.soft_normalized)
            .collect();
        let num_feasible = feasible.len();
        GenerationRecord {
            epoch: self.epoch,
            mean_fitness: self.info.iter().map(|i| i.fitness).sum::<f64>() / n,
            max_fitness: self.max_fitness(),
            min_soft_feasible: feasible.iter().copied().reduce(f64::min),
            mean_soft_feasible: (num_feasible > 0)
                .then(|| feasible.iter().sum::<f64>() / num_feasible as f64),
            min_hard: self.info.iter().map(|i| i.hard_total).min().unwrap_or(0),
            mean_hard: self.info.iter().map(|i| i.hard_total as f64).sum::<f64>() / n,
            num_feasible,
            num_optimal: has_reference.then(|| self.info.iter().filter(|i| i.optimal).count()),
            mean_crowding: crowding.map(|c| c.iter().sum::<u64>() as f64 / c.len().max(1) as f64),
            max_crowding: crowding.and_then(|c| c.iter().copied().max()),
            elapsed_seconds: self.elapsed_seconds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EpochCap,
    Optimal,
    Patience,
    WallTime,
}

/// Outcome of one GA run.
#[derive(Debug, Clone)]
pub struct RunTrace {
    /// One record per generation, starting with the initial population at epoch 0.
    pub records: Vec<GenerationRecord>,
    pub final_population: Vec<Schedule>,
    /// Highest-fitness schedule seen in any population, earliest on ties.
    pub best_schedule: Schedule,
    pub best_fitness: f64,
    pub stop_reason: StopReason,
    /// First epoch whose population held an optimal schedule.
    pub first_optimal_epoch: Option<usize>,
    pub elapsed_seconds: f64,
}

impl RunTrace {
    pub fn epochs(&self) -> usize {
        self.records.last().map_or(0, |r| r.epoch)
    }
}

pub fn update_prob_greedy(epoch: usize, cfg: &GaConfig) -> f64 {
    let t = epoch as f64 / cfg.nb_max_epochs as f64;
    (cfg.min_prob_greedy + (1.0 - cfg.min_prob_greedy) * t).min(1.0)
}

/// Resets on a strict improvement of the best fitness, otherwise counts up.
pub fn update_patience(patience: usize, best_so_far: f64, new_best: f64) -> usize {
    if new_best > best_so_far {
        0
    } else {
        patience + 1
    }
}

/// Why the run should halt now, if it should.
pub fn stop_reason(
    state: &PopulationState,
    cfg: &GaConfig,
    instance: &Instance,
) -> Result<Option<StopReason>> {
    match cfg.stop_cond_version {
        StopVersion::V1 => {
            instance.reference_min_soft()?;
            if state.info.iter().any(|i| i.optimal) {
                return Ok(Some(StopReason::Optimal));
            }
        }
        StopVersion::V2 => {
            if state.patience >= cfg.max_patience {
                return Ok(Some(StopReason::Patience));
            }
        }
    }
    if state.epoch >= cfg.nb_max_epochs {
        return Ok(Some(StopReason::EpochCap));
    }
    if cfg
        .max_wall_seconds
        .is_some_and(|cap| state.elapsed_seconds + state.max_generation_seconds >= cap)
    {
        return Ok(Some(StopReason::WallTime));
    }
    Ok(None)
}

pub fn stop_alg(state: &PopulationState, cfg: &GaConfig, instance: &Instance) -> Result<bool> {
    Ok(stop_reason(state, cfg, instance)?.is_some())
}

fn check_batch(batch: &[Schedule], expected: usize, instance: &Instance) -> Result<()> {
    if batch.len() != expected {
        return Err(Error::Operator(format!(
            "improver returned {} schedules for a batch of {expected}",
            batch.len()
        )));
    }
    batch.iter().try_for_each(|s| {
        instance
            .check_schedule(s)
            .map_err(|e| Error::Operator(e.to_string()))
    })
}

/// Runs the GA to its stopping condition.
///
/// `improver` is applied to every offspring batch when `cfg.use_improver` is set.
pub fn run(
    instance: &Instance,
    cfg: &GaConfig,
    improver: &mut dyn ImprovementOperator,
) -> Result<RunTrace> {
    instance.validate()?;
    cfg.validate()?;
    if cfg.stop_cond_version == StopVersion::V1 {
        instance.reference_min_soft()?;
    }
    let has_reference = instance.reference_min_soft.is_some();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let init = get_init_population(instance, cfg.pop_size, &mut rng);
    let mut state = PopulationState::new(init, instance, cfg)?;
    state.elapsed_seconds = start.elapsed().as_secs_f64();
    let mut records = vec![state.record(None, has_reference)];
    let mut best = best_of(&state);
    let mut first_optimal_epoch = state.info.iter().any(|i| i.optimal).then_some(0);

    let stop = loop {
        if let Some(reason) = stop_reason(&state, cfg, instance)? {
            break reason;
        }
        let offspring = crossover_all(
            &state.chromosomes,
            cfg.probab_crossover,
            &cfg.crossover_mix,
            &mut rng,
        );
        let mut offspring = mutation_all(
            offspring,
            instance,
            cfg.probab_mutation,
            &cfg.mutation_mix,
            &mut rng,
        );
        if cfg.use_improver {
            let epoch = state.epoch;
            let wrap = |e: Error| Error::OperatorFailure {
                epoch,
                source: Box::new(e),
            };
            let improved = improver.improve(&offspring, instance).map_err(wrap)?;
            check_batch(&improved, offspring.len(), instance).map_err(wrap)?;
            offspring = improved;
        }
        let offspring_info = evaluate_all(&offspring, instance)?;

        let distances = calc_crowding_distances(&state.chromosomes, &offspring);
        let matching = find_matchings(&distances);
        state.prob_greedy = update_prob_greedy(state.epoch, cfg);
        let parent_fit: Vec<f64> = state.info.iter().map(|i| i.fitness).collect();
        let child_fit: Vec<f64> = offspring_info.iter().map(|i| i.fitness).collect();
        let winners = select_winners(
            &parent_fit,
            &child_fit,
            &matching,
            state.prob_greedy,
            &mut rng,
        )?;

        let mut offspring: Vec<Option<Schedule>> = offspring.into_iter().map(Some).collect();
        for (i, w) in winners.iter().enumerate() {
            if *w == Winner::Offspring {
                let j = matching[i];
                state.chromosomes[i] = offspring[j].take().expect("matching is a permutation");
                state.info[i] = offspring_info[j];
            }
        }
        let crowding: Vec<u64> = matching
            .iter()
            .enumerate()
            .map(|(i, &j)| distances[i][j])
            .collect();

        state.epoch += 1;
        let gen_best = state.max_fitness();
        state.patience = update_patience(state.patience, state.best_fitness_so_far, gen_best);
        if gen_best > state.best_fitness_so_far {
            state.best_fitness_so_far = gen_best;
        }
        if gen_best > best.1 {
            best = best_of(&state);
        }
        if first_optimal_epoch.is_none() && state.info.iter().any(|i| i.optimal) {
            first_optimal_epoch = Some(state.epoch);
        }
        let now = start.elapsed().as_secs_f64();
        state.max_generation_seconds = state
            .max_generation_seconds
            .max(now - state.elapsed_seconds);
        state.elapsed_seconds = now;
        records.push(state.record(Some(&crowding), has_reference));
    };

    Ok(RunTrace {
        records,
        final_population: state.chromosomes,
        best_schedule: best.0,
        best_fitness: best.1,
        stop_reason: stop,
        first_optimal_epoch,
        elapsed_seconds: state.elapsed_seconds,
    })
}

fn best_of(state: &PopulationState) -> (Schedule, f64) {
    let mut k = 0;
    for (i, info) in state.info.iter().enumerate() {
        if info.fitness > state.info[k].fitness {
            k = i;
        }
    }
    (state.chromosomes[k].clone(), state.info[k].fitness)
}
