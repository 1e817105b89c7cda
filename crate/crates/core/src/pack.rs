//! Cost model, optimal processor allocation inside one pack, and first-fit
//! pack construction for fixed allocations.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::workload::{SpeedupProfile, Workload};

/// Sum of durations in non-decreasing order.
///
/// Every total in the crate goes through here so that two co-schedules made
/// of the same pack costs have bitwise-equal totals whatever their pack order.
pub fn sum_ascending(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut values: Vec<f64> = values.into_iter().collect();
    values.sort_by(f64::total_cmp);
    values.into_iter().sum()
}

/// A duration that may be unbounded (an infeasible sub-problem).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cost {
    Finite(f64),
    Infinite,
}

impl Cost {
    pub fn finite(self) -> Option<f64> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Infinite => None,
        }
    }

    fn max(self, other: Cost) -> Cost {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a.max(b)),
            _ => Cost::Infinite,
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.partial_cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Some(Ordering::Less),
            (Cost::Infinite, Cost::Finite(_)) => Some(Ordering::Greater),
            (Cost::Infinite, Cost::Infinite) => Some(Ordering::Equal),
        }
    }
}

/// Processor count per task, indexed like the workload's tasks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Allocation(pub Vec<usize>);

impl Allocation {
    pub fn uniform(n: usize, procs: usize) -> Self {
        Allocation(vec![procs; n])
    }

    pub fn procs(&self, task: usize) -> usize {
        self.0[task]
    }

    pub fn check(&self, workload: &Workload) -> Result<()> {
        if self.0.len() != workload.n() {
            return Err(Error::InvalidAllocation(format!(
                "{} entries for {} tasks",
                self.0.len(),
                workload.n()
            )));
        }
        if let Some((i, &s)) = self
            .0
            .iter()
            .enumerate()
            .find(|(_, &s)| s == 0 || s > workload.p())
        {
            return Err(Error::InvalidAllocation(format!(
                "task {} gets {s} processors, allowed 1..={}",
                workload.task(i).id,
                workload.p()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackMember {
    /// Index of the task in its workload.
    pub task: usize,
    pub procs: usize,
}

/// Tasks started together; the pack lasts as long as its slowest member.
#[derive(Debug, Clone, PartialEq)]
pub struct Pack {
    pub members: Vec<PackMember>,
    pub cost: f64,
}

impl Pack {
    /// Builds a pack and computes its cost from the workload.
    pub fn new(workload: &Workload, members: Vec<PackMember>) -> Self {
        let cost = pack_cost(workload, &members);
        Pack { members, cost }
    }

    pub fn procs_used(&self) -> usize {
        self.members.iter().map(|m| m.procs).sum()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn pack_cost(workload: &Workload, members: &[PackMember]) -> f64 {
    members
        .iter()
        .map(|m| workload.time(m.task, m.procs))
        .fold(0.0, f64::max)
}

/// Packs executed one after the other.
#[derive(Debug, Clone, PartialEq)]
pub struct CoSchedule {
    pub packs: Vec<Pack>,
    pub total_cost: f64,
}

impl CoSchedule {
    pub fn new(packs: Vec<Pack>) -> Self {
        let total_cost = sum_ascending(packs.iter().map(|p| p.cost));
        CoSchedule { packs, total_cost }
    }

    /// Processor count of every task, indexed like the workload.
    pub fn allocation(&self, n: usize) -> Allocation {
        let mut procs = vec![0; n];
        for m in self.packs.iter().flat_map(|p| &p.members) {
            procs[m.task] = m.procs;
        }
        Allocation(procs)
    }

    /// Re-allocates processors inside every pack with [`optimal_one_pack`].
    pub fn reallocate(&self, workload: &Workload) -> CoSchedule {
        let packs = self
            .packs
            .iter()
            .map(|pack| {
                let tasks: Vec<usize> = pack.members.iter().map(|m| m.task).collect();
                optimal_pack(workload, &tasks).expect("pack fits by construction")
            })
            .collect();
        CoSchedule::new(packs)
    }

    /// Serializable form naming tasks by id.
    pub fn to_doc(&self, workload: &Workload) -> ScheduleDoc {
        ScheduleDoc {
            total_cost: self.total_cost,
            packs: self
                .packs
                .iter()
                .map(|pack| PackDoc {
                    cost: pack.cost,
                    members: pack
                        .members
                        .iter()
                        .map(|m| MemberDoc {
                            id: workload.task(m.task).id.clone(),
                            procs: m.procs,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Rebuilds a schedule from its serialized form; stored costs are kept
    /// as-is so that [`evaluate`] can compare them with the workload.
    pub fn from_doc(workload: &Workload, doc: &ScheduleDoc) -> Result<CoSchedule> {
        let packs = doc
            .packs
            .iter()
            .map(|pack| {
                let members = pack
                    .members
                    .iter()
                    .map(|m| {
                        let task = workload.index_of(&m.id).ok_or_else(|| {
                            Error::InfeasibleSchedule(Infeasibility::UnknownTask(m.id.clone()))
                        })?;
                        Ok(PackMember {
                            task,
                            procs: m.procs,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Pack {
                    members,
                    cost: pack.cost,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CoSchedule {
            packs,
            total_cost: doc.total_cost,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub total_cost: f64,
    pub packs: Vec<PackDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackDoc {
    pub cost: f64,
    pub members: Vec<MemberDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberDoc {
    pub id: String,
    pub procs: usize,
}

/// Processor counts and cost of a single-pack schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct OnePack {
    /// Processor count per input task, in input order.
    pub procs: Vec<usize>,
    pub cost: f64,
}

/// Minimum-cost allocation of `p` processors to tasks sharing one pack.
///
/// Every task starts with one processor and the currently longest task
/// repeatedly receives one more until all `p` are handed out. Ties go to the
/// task listed first. Runs in `O(k log k + p log k)`.
pub fn optimal_one_pack(profiles: &[&SpeedupProfile], p: usize) -> Result<OnePack> {
    let k = profiles.len();
    if k == 0 {
        return Err(Error::EmptyPack);
    }
    if k > p {
        return Err(Error::TooManyTasks { tasks: k, p });
    }
    debug_assert!(profiles.iter().all(|pr| pr.max_procs() >= p));

    let mut procs = vec![1usize; k];
    let mut heap: BinaryHeap<(OrderedFloat<f64>, Reverse<usize>)> = profiles
        .iter()
        .enumerate()
        .map(|(i, pr)| (OrderedFloat(pr.time(1)), Reverse(i)))
        .collect();

    for _ in 0..p - k {
        let (_, Reverse(i)) = heap.pop().expect("heap holds every task");
        procs[i] += 1;
        heap.push((OrderedFloat(profiles[i].time(procs[i])), Reverse(i)));
    }

    let cost = heap.peek().map(|(t, _)| t.0).expect("non-empty");
    Ok(OnePack { procs, cost })
}

/// Builds the optimal pack for the given workload tasks.
pub fn optimal_pack(workload: &Workload, tasks: &[usize]) -> Result<Pack> {
    let profiles: Vec<&SpeedupProfile> = tasks.iter().map(|&i| &workload.task(i).profile).collect();
    let one = optimal_one_pack(&profiles, workload.p())?;
    let members = tasks
        .iter()
        .zip(one.procs)
        .map(|(&task, procs)| PackMember { task, procs })
        .collect();
    Ok(Pack {
        members,
        cost: one.cost,
    })
}

/// Optimal single-pack cost by dynamic programming over
/// `c(i, q) = min_{1 <= q' <= q} max(c(i-1, q-q'), t_i(q'))`.
///
/// `O(k p^2)`; returns [`Cost::Infinite`] when there are more tasks than
/// processors.
pub fn one_pack_dp(profiles: &[&SpeedupProfile], p: usize) -> Result<Cost> {
    let (first, rest) = profiles.split_first().ok_or(Error::EmptyPack)?;

    // prev[q] = c(i-1, q) for q in 0..=p
    let mut prev: Vec<Cost> = (0..=p)
        .map(|q| {
            if q == 0 {
                Cost::Infinite
            } else {
                Cost::Finite(first.time(q))
            }
        })
        .collect();
    for profile in rest {
        let mut next = vec![Cost::Infinite; p + 1];
        for q in 1..=p {
            next[q] = (1..=q)
                .map(|give| prev[q - give].max(Cost::Finite(profile.time(give))))
                .fold(Cost::Infinite, |best, c| if c < best { c } else { best });
        }
        prev = next;
    }
    Ok(prev[p])
}

/// First-fit decreasing pack construction for a fixed allocation: tasks are
/// taken by non-increasing `t(i, procs(i))` and each goes to the first pack
/// with enough free processors and fewer than `k` members.
pub fn make_packs(workload: &Workload, alloc: &Allocation, k: usize) -> Result<CoSchedule> {
    alloc.check(workload)?;
    check_k(workload, k)?;
    let order = sorted_by_time(workload, &alloc.0);
    Ok(make_packs_ordered(workload, &alloc.0, &order, k))
}

pub(crate) fn check_k(workload: &Workload, k: usize) -> Result<()> {
    if k == 0 || k > workload.p() {
        return Err(Error::InvalidPackSize { k, p: workload.p() });
    }
    Ok(())
}

/// Longest first, lower index first on ties.
pub(crate) fn time_order(workload: &Workload, procs: &[usize], a: usize, b: usize) -> Ordering {
    workload
        .time(b, procs[b])
        .total_cmp(&workload.time(a, procs[a]))
        .then(a.cmp(&b))
}

pub(crate) fn sorted_by_time(workload: &Workload, procs: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..workload.n()).collect();
    order.sort_by(|&a, &b| time_order(workload, procs, a, b));
    order
}

/// [`make_packs`] with the decreasing order supplied by the caller.
pub(crate) fn make_packs_ordered(
    workload: &Workload,
    procs: &[usize],
    order: &[usize],
    k: usize,
) -> CoSchedule {
    let p = workload.p();
    let mut packs: Vec<Pack> = Vec::new();
    let mut free: Vec<usize> = Vec::new();

    for &task in order {
        let need = procs[task];
        let member = PackMember { task, procs: need };
        match (0..packs.len()).find(|&b| free[b] >= need && packs[b].len() < k) {
            Some(b) => {
                free[b] -= need;
                packs[b].members.push(member);
            }
            None => {
                free.push(p - need);
                packs.push(Pack {
                    members: vec![member],
                    cost: workload.time(task, need),
                });
            }
        }
    }
    // the first member of each pack is its longest
    CoSchedule::new(packs)
}

/// Which schedule invariant is broken.
#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    UnknownTask(String),
    TaskOutOfRange {
        task: usize,
    },
    DuplicateTask {
        task: usize,
    },
    MissingTask {
        task: usize,
    },
    EmptyPack {
        pack: usize,
    },
    ProcessorCount {
        pack: usize,
        task: usize,
        procs: usize,
    },
    Capacity {
        pack: usize,
        used: usize,
        p: usize,
    },
    Cardinality {
        pack: usize,
        size: usize,
        k: usize,
    },
    PackCost {
        pack: usize,
        stored: f64,
        actual: f64,
    },
    TotalCost {
        stored: f64,
        actual: f64,
    },
}

impl Infeasibility {
    /// Short name of the violated invariant.
    pub fn invariant(&self) -> &'static str {
        match self {
            Infeasibility::UnknownTask(_)
            | Infeasibility::TaskOutOfRange { .. }
            | Infeasibility::DuplicateTask { .. }
            | Infeasibility::MissingTask { .. }
            | Infeasibility::EmptyPack { .. } => "partition",
            Infeasibility::ProcessorCount { .. } | Infeasibility::Capacity { .. } => "capacity",
            Infeasibility::Cardinality { .. } => "cardinality",
            Infeasibility::PackCost { .. } | Infeasibility::TotalCost { .. } => "cost",
        }
    }
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.invariant())?;
        match self {
            Infeasibility::UnknownTask(id) => write!(f, "unknown task {id:?}"),
            Infeasibility::TaskOutOfRange { task } => write!(f, "task index {task} out of range"),
            Infeasibility::DuplicateTask { task } => {
                write!(f, "task #{task} appears more than once")
            }
            Infeasibility::MissingTask { task } => write!(f, "task #{task} is not scheduled"),
            Infeasibility::EmptyPack { pack } => write!(f, "pack {pack} is empty"),
            Infeasibility::ProcessorCount { pack, task, procs } => {
                write!(f, "task #{task} in pack {pack} gets {procs} processors")
            }
            Infeasibility::Capacity { pack, used, p } => {
                write!(f, "pack {pack} uses {used} processors out of {p}")
            }
            Infeasibility::Cardinality { pack, size, k } => {
                write!(f, "pack {pack} holds {size} tasks, limit {k}")
            }
            Infeasibility::PackCost {
                pack,
                stored,
                actual,
            } => write!(
                f,
                "pack {pack} stores cost {stored}, profiles give {actual}"
            ),
            Infeasibility::TotalCost { stored, actual } => {
                write!(f, "stored total {stored}, packs sum to {actual}")
            }
        }
    }
}

/// Checks that `schedule` is a valid co-schedule of `workload` (with at most
/// `k` tasks per pack when given) whose stored costs match the profiles, and
/// returns its total cost.
pub fn evaluate(workload: &Workload, schedule: &CoSchedule, k: Option<usize>) -> Result<f64> {
    let fail = |why| Err(Error::InfeasibleSchedule(why));
    let p = workload.p();
    let mut seen = vec![false; workload.n()];

    for (b, pack) in schedule.packs.iter().enumerate() {
        if pack.is_empty() {
            return fail(Infeasibility::EmptyPack { pack: b });
        }
        for m in &pack.members {
            if m.task >= workload.n() {
                return fail(Infeasibility::TaskOutOfRange { task: m.task });
            }
            if std::mem::replace(&mut seen[m.task], true) {
                return fail(Infeasibility::DuplicateTask { task: m.task });
            }
            if m.procs == 0 || m.procs > p {
                return fail(Infeasibility::ProcessorCount {
                    pack: b,
                    task: m.task,
                    procs: m.procs,
                });
            }
        }
        let used = pack.procs_used();
        if used > p {
            return fail(Infeasibility::Capacity { pack: b, used, p });
        }
        if let Some(k) = k {
            if pack.len() > k {
                return fail(Infeasibility::Cardinality {
                    pack: b,
                    size: pack.len(),
                    k,
                });
            }
        }
        let actual = pack_cost(workload, &pack.members);
        if actual != pack.cost {
            return fail(Infeasibility::PackCost {
                pack: b,
                stored: pack.cost,
                actual,
            });
        }
    }
    if let Some(task) = seen.iter().position(|s| !s) {
        return fail(Infeasibility::MissingTask { task });
    }
    let actual = sum_ascending(schedule.packs.iter().map(|p| p.cost));
    if actual != schedule.total_cost {
        return fail(Infeasibility::TotalCost {
            stored: schedule.total_cost,
            actual,
        });
    }
    Ok(actual)
}
