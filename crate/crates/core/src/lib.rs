//! Co-scheduling of moldable parallel tasks.
//!
//! A workload of `n` tasks, each with an execution time for every processor
//! count `1..=p`, is split into *packs*. The tasks of a pack start together
//! and share the `p` processors; packs run one after the other, and a pack
//! lasts as long as its longest task. The goal is to minimize the sum of
//! pack durations with at most `k` tasks per pack.
//!
//! * [`workload`] - profiles, validation, synthetic generators, file formats
//! * [`pack`] - cost model, optimal allocation in one pack, first-fit packing
//! * [`approx`] - Pack-Approx
//! * [`heuristics`] - Random-Pack, Random-Proc, Pack-by-Pack, multi-run wrapper
//! * [`exact`] - exhaustive search, two-per-pack matching, integer program
//! * [`metrics`] - relative cost, packing ratio, relative response time
//! * [`experiment`] - sweeps over heuristics and pack sizes with reports

pub mod approx;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod heuristics;
pub mod metrics;
pub mod pack;
pub mod workload;

pub use error::{Error, Result};
pub use pack::{Allocation, CoSchedule, Pack, PackMember};
pub use workload::{SpeedupProfile, Task, Workload};
