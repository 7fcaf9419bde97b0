//! Multi-modal genetic algorithm with probabilistic crowding.
//!
//! One generation runs crossover over a random pairing of the population,
//! mutation, an optional batch improvement operator, parent/offspring
//! matching by minimum total Hamming distance, and pairwise replacement.

mod config;
mod matching;
mod operators;
mod run;
mod selection;
mod trace;

pub use config::{CrossoverMix, GaConfig, MutationMix, StopVersion};
pub use matching::{assignment_cost, calc_crowding_distances, find_matchings};
pub use operators::{
    crossover_all, cx_one_line, cx_one_line_at, cx_one_line_partially, cx_segment_at,
    get_init_population, mutate, mutation_all, MutationKind,
};
pub use run::{
    run, stop_alg, update_patience, update_prob_greedy, ChromosomeInfo, PopulationState, RunTrace,
    StopReason,
};
pub use selection::{select_winners, selection, Winner};
pub use trace::{read_trace_csv, trace_csv, write_trace_csv, GenerationRecord, TRACE_COLUMNS};
