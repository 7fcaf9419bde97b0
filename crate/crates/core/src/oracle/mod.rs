//! Exact optimisation for tiny instances and the LP-file bridge to external
//! MILP solvers.

pub mod lp;
mod patterns;
mod search;

pub use lp::{export_lp, import_solution, write_lp, write_solution, LpModel};
pub use patterns::{enumerate_patterns, feasible_rows, EmployeePattern, MAX_PATTERN_SPACE};
pub use search::{solve_exact, OracleResult, MAX_EXACT_EMPLOYEES};
