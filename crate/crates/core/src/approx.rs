//! Pack-Approx: start from one processor per task, build packs with
//! first-fit decreasing, then repeatedly give one more processor to the
//! longest task and rebuild, keeping the cheapest co-schedule seen. For
//! `k = p` the result costs at most three times the optimum.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::pack::{check_k, make_packs_ordered, sorted_by_time, time_order, CoSchedule};
use crate::workload::Workload;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExitReason {
    /// The longest task already runs on all `p` processors.
    MaxTaskAtP,
    /// Total work divided by `p` exceeds the longest execution time.
    WorkExceedsTmax,
    /// The `n (p - 1)` iteration budget ran out.
    IterationBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub iter: usize,
    /// Total work `sum_j t(j, procs(j)) * procs(j)`.
    pub a_tot: f64,
    /// Longest execution time under the current allocation.
    pub t_max: f64,
    /// Task index achieving `t_max` (lowest index on ties).
    pub j_star: usize,
    /// Cost of the co-schedule built in this iteration.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxTrace {
    pub iterations: Vec<Iteration>,
    /// Smallest iteration cost, before the final in-pack reallocation.
    pub best_cost: f64,
    pub exit_reason: ExitReason,
}

impl ApproxTrace {
    /// Writes the trace as CSV with columns `iter,A_tot,t_max,j_star,cost`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut out = csv_writer(out);
        out.write_record(["iter", "A_tot", "t_max", "j_star", "cost"])?;
        for it in &self.iterations {
            out.write_record([
                it.iter.to_string(),
                it.a_tot.to_string(),
                it.t_max.to_string(),
                it.j_star.to_string(),
                it.cost.to_string(),
            ])?;
        }
        out.flush()
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(out)
}

/// Runs Pack-Approx with at most `k` tasks per pack.
///
/// The returned schedule is the cheapest one built during the loop, with
/// processors then re-allocated optimally inside each of its packs; this
/// never increases its cost. The trace records the loop itself.
pub fn pack_approx(workload: &Workload, k: usize) -> Result<(CoSchedule, ApproxTrace)> {
    check_k(workload, k)?;
    let n = workload.n();
    let p = workload.p();

    let mut procs = vec![1usize; n];
    // longest first; kept sorted across iterations
    let mut order = sorted_by_time(workload, &procs);
    let mut a_tot_parts: Vec<f64> = (0..n).map(|j| workload.work(j, 1)).collect();

    let mut best: Option<CoSchedule> = None;
    let mut iterations = Vec::new();
    let mut exit_reason = ExitReason::IterationBudget;

    // n (p - 1) increments at most, so n (p - 1) + 1 evaluations
    for iter in 0..=n * (p - 1) {
        let a_tot: f64 = a_tot_parts.iter().sum();
        let j_star = order[0];
        let t_max = workload.time(j_star, procs[j_star]);

        let schedule = make_packs_ordered(workload, &procs, &order, k);
        let cost = schedule.total_cost;
        iterations.push(Iteration {
            iter,
            a_tot,
            t_max,
            j_star,
            cost,
        });
        if best.as_ref().is_none_or(|b| cost < b.total_cost) {
            best = Some(schedule);
        }

        if a_tot / p as f64 > t_max {
            exit_reason = ExitReason::WorkExceedsTmax;
            break;
        }
        if procs[j_star] == p {
            exit_reason = ExitReason::MaxTaskAtP;
            break;
        }

        procs[j_star] += 1;
        a_tot_parts[j_star] = workload.work(j_star, procs[j_star]);
        // j_star got faster: move it back to its place in the order
        let head = order.remove(0);
        let at = order.partition_point(|&o| time_order(workload, &procs, o, head).is_lt());
        order.insert(at, head);
    }

    let best = best.expect("at least one iteration runs");
    let trace = ApproxTrace {
        iterations,
        best_cost: best.total_cost,
        exit_reason,
    };
    Ok((best.reallocate(workload), trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pack::evaluate;

    #[test]
    fn constant_profiles_exit_immediately() {
        // 5 tasks of constant time 4 on p=3
        let w = Workload::from_times(3, vec![vec![4.0; 3]; 5]).unwrap();
        for k in 1..=3 {
            let (s, trace) = pack_approx(&w, k).unwrap();
            let expected = 5usize.div_ceil(k.min(3)) as f64 * 4.0;
            assert_eq!(s.total_cost, expected);
            assert_eq!(trace.iterations.len(), 1);
            // A_tot/p = 20/3 > 4
            assert_eq!(trace.exit_reason, ExitReason::WorkExceedsTmax);
        }
    }

    #[test]
    fn single_task_grows_to_p() {
        let w = Workload::from_times(4, vec![vec![8.0, 5.0, 4.0, 3.5]]).unwrap();
        let (s, trace) = pack_approx(&w, 2).unwrap();
        assert_eq!(s.total_cost, 3.5);
        assert_eq!(s.packs[0].members[0].procs, 4);
        assert_eq!(trace.exit_reason, ExitReason::MaxTaskAtP);
        assert_eq!(trace.iterations.len(), 4);
    }

    #[test]
    fn p_one_runs_one_iteration() {
        let w = Workload::from_times(1, vec![vec![3.0], vec![2.0]]).unwrap();
        let (s, trace) = pack_approx(&w, 1).unwrap();
        assert_eq!(s.total_cost, 5.0);
        assert_eq!(trace.iterations.len(), 1);
    }

    #[test]
    fn trace_is_monotone_and_exports() {
        let w = Workload::from_times(
            4,
            vec![
                vec![12.0, 7.0, 5.0, 4.0],
                vec![10.0, 6.0, 4.5, 3.6],
                vec![3.0, 2.0, 1.8, 1.6],
            ],
        )
        .unwrap();
        let (s, trace) = pack_approx(&w, 4).unwrap();
        assert!(evaluate(&w, &s, Some(4)).is_ok());
        assert!(s.total_cost <= trace.best_cost);
        for pair in trace.iterations.windows(2) {
            assert!(pair[1].a_tot >= pair[0].a_tot);
            assert!(pair[1].t_max <= pair[0].t_max);
        }
        for it in &trace.iterations {
            assert!(it.cost <= 3.0 * it.t_max.max(it.a_tot / 4.0));
        }
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,A_tot,t_max,j_star,cost\n0,25,12,0,"));
        assert_eq!(text.lines().count(), trace.iterations.len() + 1);
    }
}
