//! Schedule quality measures, each normalized against the 1-pack baseline
//! where tasks run one after the other on all `p` processors.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pack::{evaluate, sum_ascending, CoSchedule};
use crate::workload::Workload;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    /// `sum_i t(i, p)`.
    pub cost: f64,
    /// Mean completion time with shortest tasks first.
    pub mean_response: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub relative_cost: f64,
    pub packing_ratio: f64,
    pub relative_response_time: f64,
    pub baseline_cost: f64,
    pub baseline_mean_response: f64,
}

/// Mean of the completion times of tasks run back to back in the given
/// order, where `(duration, tasks)` groups start together and each task
/// finishes `own` seconds after its group starts.
fn mean_completion<'a>(groups: impl Iterator<Item = (f64, &'a [f64])>) -> f64 {
    let mut start = 0.0;
    let mut completions = Vec::new();
    for (duration, own) in groups {
        completions.extend(own.iter().map(|t| start + t));
        start += duration;
    }
    let n = completions.len() as f64;
    sum_ascending(completions) / n
}

pub fn baseline_one_pack(workload: &Workload) -> Baseline {
    let mut times: Vec<f64> = (0..workload.n())
        .map(|i| workload.time(i, workload.p()))
        .collect();
    times.sort_by(f64::total_cmp);
    let mean_response = mean_completion(times.iter().map(|t| (*t, std::slice::from_ref(t))));
    Baseline {
        cost: sum_ascending(times),
        mean_response,
    }
}

pub fn relative_cost(workload: &Workload, schedule: &CoSchedule) -> Result<f64> {
    let cost = evaluate(workload, schedule, None)?;
    Ok(cost / baseline_one_pack(workload).cost)
}

/// Work actually done over `p` times the schedule length; 1 means no idle
/// processor.
pub fn packing_ratio(workload: &Workload, schedule: &CoSchedule) -> Result<f64> {
    let cost = evaluate(workload, schedule, None)?;
    let work = sum_ascending(
        schedule
            .packs
            .iter()
            .flat_map(|pack| &pack.members)
            .map(|m| workload.work(m.task, m.procs)),
    );
    // never above 1 in exact arithmetic; clip rounding noise
    Ok((work / (workload.p() as f64 * cost)).min(1.0))
}

/// Mean task completion time when packs run in `order` (indices into
/// `schedule.packs`).
pub fn mean_response_in_order(workload: &Workload, schedule: &CoSchedule, order: &[usize]) -> f64 {
    let own: Vec<Vec<f64>> = schedule
        .packs
        .iter()
        .map(|pack| {
            pack.members
                .iter()
                .map(|m| workload.time(m.task, m.procs))
                .collect()
        })
        .collect();
    mean_completion(
        order
            .iter()
            .map(|&b| (schedule.packs[b].cost, own[b].as_slice())),
    )
}

/// Packs by non-decreasing cost, original index on ties.
pub fn shortest_first_order(schedule: &CoSchedule) -> Vec<usize> {
    let mut order: Vec<usize> = (0..schedule.packs.len()).collect();
    order.sort_by(|&a, &b| schedule.packs[a].cost.total_cmp(&schedule.packs[b].cost));
    order
}

pub fn relative_response_time(workload: &Workload, schedule: &CoSchedule) -> Result<f64> {
    evaluate(workload, schedule, None)?;
    let order = shortest_first_order(schedule);
    let mean = mean_response_in_order(workload, schedule, &order);
    Ok(mean / baseline_one_pack(workload).mean_response)
}

/// All three measures at once.
pub fn metrics(workload: &Workload, schedule: &CoSchedule) -> Result<MetricsReport> {
    let baseline = baseline_one_pack(workload);
    Ok(MetricsReport {
        relative_cost: relative_cost(workload, schedule)?,
        packing_ratio: packing_ratio(workload, schedule)?,
        relative_response_time: relative_response_time(workload, schedule)?,
        baseline_cost: baseline.cost,
        baseline_mean_response: baseline.mean_response,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pack::{Pack, PackMember};

    fn member(task: usize, procs: usize) -> PackMember {
        PackMember { task, procs }
    }

    #[test]
    fn baseline_arithmetic() {
        let w = Workload::from_times(1, vec![vec![3.0], vec![1.0], vec![2.0]]).unwrap();
        let b = baseline_one_pack(&w);
        assert_eq!(b.cost, 6.0);
        assert!((b.mean_response - 10.0 / 3.0).abs() < 1e-15);

        let w = Workload::from_times(2, vec![vec![5.0, 4.0]]).unwrap();
        assert_eq!(
            baseline_one_pack(&w),
            Baseline {
                cost: 4.0,
                mean_response: 4.0
            }
        );

        let w = Workload::from_times(1, vec![vec![2.5]; 4]).unwrap();
        let b = baseline_one_pack(&w);
        assert_eq!((b.cost, b.mean_response), (10.0, 2.5 * 5.0 / 2.0));
    }

    #[test]
    fn baseline_schedule_scores_one() {
        let w =
            Workload::from_times(2, vec![vec![3.0, 2.0], vec![5.0, 4.0], vec![2.0, 1.5]]).unwrap();
        // packs deliberately out of order
        let s = CoSchedule::new(
            [1, 0, 2]
                .into_iter()
                .map(|i| Pack::new(&w, vec![member(i, 2)]))
                .collect(),
        );
        let m = metrics(&w, &s).unwrap();
        assert_eq!(m.relative_cost, 1.0);
        assert_eq!(m.relative_response_time, 1.0);
    }

    #[test]
    fn packing_ratio_values() {
        let w = Workload::from_times(2, vec![vec![4.0, 3.0]]).unwrap();
        let s = CoSchedule::new(vec![Pack::new(&w, vec![member(0, 2)])]);
        assert_eq!(packing_ratio(&w, &s).unwrap(), 1.0);

        let w = Workload::from_times(2, vec![vec![4.0, 3.0], vec![2.0, 1.5]]).unwrap();
        let s = CoSchedule::new(vec![Pack::new(&w, vec![member(0, 1), member(1, 1)])]);
        assert_eq!(packing_ratio(&w, &s).unwrap(), 0.75);
    }

    #[test]
    fn response_uses_cost_prefixes() {
        // packs of cost 5 and 3; the cost-3 pack runs first
        let w = Workload::from_times(
            2,
            vec![
                vec![5.0, 4.0],
                vec![3.0, 2.5],
                vec![3.0, 2.0],
                vec![2.0, 1.5],
            ],
        )
        .unwrap();
        let s = CoSchedule::new(vec![
            Pack::new(&w, vec![member(0, 1), member(3, 1)]),
            Pack::new(&w, vec![member(1, 1), member(2, 1)]),
        ]);
        assert_eq!(shortest_first_order(&s), vec![1, 0]);
        // cost-3 pack: 3, 3; cost-5 pack: 3 + 5, 3 + 2
        let mean = mean_response_in_order(&w, &s, &[1, 0]);
        assert_eq!(mean, (3.0 + 3.0 + 8.0 + 5.0) / 4.0);
        let expected = mean / baseline_one_pack(&w).mean_response;
        assert_eq!(relative_response_time(&w, &s).unwrap(), expected);
    }

    #[test]
    fn infeasible_schedule_is_rejected() {
        let w = Workload::from_times(1, vec![vec![3.0], vec![1.0]]).unwrap();
        let s = CoSchedule::new(vec![Pack::new(&w, vec![member(0, 1)])]);
        assert!(metrics(&w, &s).is_err());
    }
}
