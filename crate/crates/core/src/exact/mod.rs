//! Exact solvers for small instances and optimality certificates.
//!
//! * [`exhaustive_opt`] enumerates every partition of the tasks into packs.
//! * [`exact_k2`] solves the two-tasks-per-pack case as a minimum-weight
//!   perfect matching where a vertex may be matched with itself.
//! * [`export_ilp`] / [`verify_ilp_solution`] write the integer program of
//!   the problem and check solutions produced by an external solver.

mod ilp;
mod matching;
mod partition;

pub use ilp::{
    build_ilp, export_ilp, parse_solution, verify_ilp_solution, write_lp, x_name, y_name,
    IlpConstraint, IlpModel, IlpVerdict, SolutionValues,
};
pub use matching::{exact_k2, pair_weight, DEFAULT_MATCHING_LIMIT};
pub use partition::{
    count_partitions, exhaustive_opt, for_each_partition, restricted_bell, DEFAULT_PARTITION_BUDGET,
};
