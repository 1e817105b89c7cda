//! Tasks, speedup profiles and workloads.
//!
//! A speedup profile stores the execution time of a task on `1..=p`
//! processor slots. The scheduling algorithms rely on two properties of every
//! profile: execution time never grows when processors are added, and the
//! work `j * t(j)` never shrinks. [`validate`] reports where a workload breaks
//! them and [`normalize`] repairs a raw profile.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod io;
mod synthetic;

pub use io::{load, load_csv, save, LoadMode, Loaded};
pub use synthetic::{
    fixture_i, generate_synthetic, workload_ii_preset, workload_iii_preset, KappaForm, SeqForm,
    SyntheticTaskSpec, SERIAL_FRACTIONS,
};

/// Number of cores in one processor slot unless a workload says otherwise.
pub const DEFAULT_CORES_PER_SLOT: usize = 8;

/// Execution times of one task indexed by processor count.
///
/// Entries are positive and finite. Monotonicity is not enforced here so that
/// raw measurements can be represented and then checked with [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpeedupProfile(Vec<f64>);

impl SpeedupProfile {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptyProfile);
        }
        if let Some((index, &value)) = times
            .iter()
            .enumerate()
            .find(|(_, t)| !(t.is_finite() && **t > 0.0))
        {
            return Err(Error::NonPositiveEntry { index, value });
        }
        Ok(SpeedupProfile(times))
    }

    /// Highest processor count the profile covers.
    pub fn max_procs(&self) -> usize {
        self.0.len()
    }

    /// Execution time on `procs` processors, `1 <= procs <= max_procs()`.
    #[inline]
    pub fn time(&self, procs: usize) -> f64 {
        self.0[procs - 1]
    }

    /// Processor-seconds consumed on `procs` processors.
    #[inline]
    pub fn work(&self, procs: usize) -> f64 {
        procs as f64 * self.time(procs)
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for SpeedupProfile {
    type Error = Error;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        SpeedupProfile::new(times)
    }
}

impl From<SpeedupProfile> for Vec<f64> {
    fn from(profile: SpeedupProfile) -> Self {
        profile.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    #[serde(rename = "times")]
    pub profile: SpeedupProfile,
}

impl Task {
    pub fn new(id: impl Into<String>, profile: SpeedupProfile) -> Self {
        Task {
            id: id.into(),
            profile,
        }
    }
}

/// An ordered set of tasks sharing `p` identical processor slots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Workload {
    p: usize,
    cores_per_slot: usize,
    tasks: Vec<Task>,
}

impl Workload {
    pub fn new(p: usize, tasks: Vec<Task>) -> Result<Self> {
        Self::with_cores_per_slot(p, DEFAULT_CORES_PER_SLOT, tasks)
    }

    pub fn with_cores_per_slot(p: usize, cores_per_slot: usize, tasks: Vec<Task>) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidWorkload("p must be at least 1".into()));
        }
        if cores_per_slot == 0 {
            return Err(Error::InvalidWorkload(
                "cores_per_slot must be at least 1".into(),
            ));
        }
        if tasks.is_empty() {
            return Err(Error::InvalidWorkload("workload has no tasks".into()));
        }
        let mut seen = HashSet::with_capacity(tasks.len());
        for task in &tasks {
            if task.id.is_empty() {
                return Err(Error::InvalidWorkload("task id is empty".into()));
            }
            if !seen.insert(task.id.as_str()) {
                return Err(Error::InvalidWorkload(format!(
                    "duplicate task id {:?}",
                    task.id
                )));
            }
            if task.profile.max_procs() != p {
                return Err(Error::InvalidWorkload(format!(
                    "task {:?} has {} times, expected p={p}",
                    task.id,
                    task.profile.max_procs()
                )));
            }
        }
        Ok(Workload {
            p,
            cores_per_slot,
            tasks,
        })
    }

    /// Convenience constructor from raw rows; ids are `T1..Tn`.
    pub fn from_times(p: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let tasks = rows
            .into_iter()
            .enumerate()
            .map(|(i, times)| {
                Ok(Task::new(
                    format!("T{}", i + 1),
                    SpeedupProfile::new(times)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Workload::new(p, tasks)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn cores_per_slot(&self) -> usize {
        self.cores_per_slot
    }

    pub fn n(&self) -> usize {
        self.tasks.len()
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, index: usize) -> &Task {
        &self.tasks[index]
    }

    /// `t(task, procs)`.
    #[inline]
    pub fn time(&self, task: usize, procs: usize) -> f64 {
        self.tasks[task].profile.time(procs)
    }

    #[inline]
    pub fn work(&self, task: usize, procs: usize) -> f64 {
        self.tasks[task].profile.work(procs)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }

    /// Restriction to the given task indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Workload> {
        let tasks = indices.iter().map(|&i| self.tasks[i].clone()).collect();
        Workload::with_cores_per_slot(self.p, self.cores_per_slot, tasks)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `t(j+1) > t(j)`
    IncreasingTime,
    /// `(j+1) t(j+1) < j t(j)`
    DecreasingWork,
}

/// A point where a profile breaks the speedup model, between columns `j` and
/// `j + 1` (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub task: String,
    pub task_index: usize,
    pub j: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::IncreasingTime => "execution time increases",
            ViolationKind::DecreasingWork => "work decreases",
        };
        write!(
            f,
            "task {} (#{}): {what} between j={} and j={}",
            self.task,
            self.task_index + 1,
            self.j,
            self.j + 1
        )
    }
}

/// Violations of a single profile, tagged with the given task.
pub fn profile_violations(
    task: &str,
    task_index: usize,
    profile: &SpeedupProfile,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for j in 1..profile.max_procs() {
        let mut push = |kind| {
            out.push(Violation {
                task: task.to_owned(),
                task_index,
                j,
                kind,
            })
        };
        if profile.time(j + 1) > profile.time(j) {
            push(ViolationKind::IncreasingTime);
        }
        if profile.work(j + 1) < profile.work(j) {
            push(ViolationKind::DecreasingWork);
        }
    }
    out
}

/// Every `(task, j)` where the workload breaks time or work monotonicity.
pub fn validate(workload: &Workload) -> Vec<Violation> {
    workload
        .tasks()
        .iter()
        .enumerate()
        .flat_map(|(i, task)| profile_violations(&task.id, i, &task.profile))
        .collect()
}

/// Smallest profile that dominates `raw` pointwise after the running-minimum
/// clamp and satisfies both monotonicity rules. `t(1)` is never changed.
pub fn normalize(raw: &[f64]) -> Result<SpeedupProfile> {
    let mut times = SpeedupProfile::new(raw.to_vec())?.0;

    for j in 1..times.len() {
        times[j] = times[j].min(times[j - 1]);
    }

    for j in 1..times.len() {
        // column j (0-based) holds t(j+1); its work must reach j * t(j)
        let prev_work = j as f64 * times[j - 1];
        let next = (j + 1) as f64;
        if next * times[j] < prev_work {
            let mut raised = prev_work / next;
            while next * raised < prev_work {
                raised = raised.next_up();
            }
            times[j] = raised;
        }
    }

    Ok(SpeedupProfile(times))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(times: Vec<f64>) -> Workload {
        let p = times.len();
        Workload::from_times(p, vec![times]).unwrap()
    }

    #[test]
    fn valid_profile_has_no_violations() {
        assert!(validate(&single(vec![10.0, 6.0, 5.0, 4.5])).is_empty());
    }

    #[test]
    fn increasing_time_is_reported() {
        let v = validate(&single(vec![10.0, 12.0]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].j, 1);
        assert_eq!(v[0].kind, ViolationKind::IncreasingTime);
    }

    #[test]
    fn decreasing_work_is_reported() {
        let v = validate(&single(vec![10.0, 4.0]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].j, 1);
        assert_eq!(v[0].kind, ViolationKind::DecreasingWork);
    }

    #[test]
    fn normalize_clamps_then_raises_work() {
        let out = normalize(&[10.0, 12.0, 5.0]).unwrap();
        assert_eq!(out.times()[..2], [10.0, 10.0]);
        assert!((out.times()[2] - 20.0 / 3.0).abs() < 1e-12);
        assert!(profile_violations("x", 0, &out).is_empty());
    }

    #[test]
    fn normalize_keeps_valid_profiles() {
        let raw = [8.0, 5.0, 4.0, 3.5];
        assert_eq!(normalize(&raw).unwrap().times(), &raw);
        assert_eq!(normalize(&[6.0]).unwrap().times(), &[6.0]);
    }

    #[test]
    fn normalize_rejects_non_positive() {
        assert!(matches!(
            normalize(&[3.0, 0.0]),
            Err(Error::NonPositiveEntry { index: 1, .. })
        ));
        assert!(matches!(normalize(&[]), Err(Error::EmptyProfile)));
        assert!(normalize(&[f64::NAN]).is_err());
    }

    #[test]
    fn workload_rejects_bad_shapes() {
        assert!(Workload::from_times(2, vec![vec![1.0]]).is_err());
        assert!(Workload::from_times(1, vec![]).is_err());
        let a = Task::new("a", SpeedupProfile::new(vec![1.0]).unwrap());
        assert!(Workload::new(1, vec![a.clone(), a]).is_err());
    }

    /// Oracle: the least profile with t(1) fixed that is dominated by the
    /// running minimum and meets both rules, built column by column.
    fn least_valid(raw: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(raw.len());
        let mut running_min = f64::INFINITY;
        for (j, &t) in raw.iter().enumerate() {
            running_min = running_min.min(t);
            let floor = match out.last() {
                Some(&prev) => j as f64 * prev / (j + 1) as f64,
                None => 0.0,
            };
            out.push(running_min.max(floor));
        }
        out
    }

    proptest! {
        #[test]
        fn normalize_output_is_valid(raw in prop::collection::vec(0.01f64..1e6, 1..24)) {
            let out = normalize(&raw).unwrap();
            prop_assert!(profile_violations("x", 0, &out).is_empty());
            prop_assert_eq!(out.time(1), raw[0]);
            for (a, b) in out.times().iter().zip(least_valid(&raw)) {
                prop_assert!((a - b).abs() <= 1e-9 * b);
            }
        }

        #[test]
        fn normalize_is_idempotent(raw in prop::collection::vec(0.01f64..1e6, 1..24)) {
            let once = normalize(&raw).unwrap();
            let twice = normalize(once.times()).unwrap();
            prop_assert_eq!(once, twice);
        }
    }
}
