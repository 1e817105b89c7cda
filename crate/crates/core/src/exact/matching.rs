//! Two tasks per pack as a minimum-weight perfect matching with loops.
//!
//! Each task is a vertex. A loop on task `i` costs `t(i, p)` (the task runs
//! alone). An edge between `i < i'` costs the best split of the `p`
//! processors between the two, `min_{1 <= j < p} max(t(i, p - j), t(i', j))`.
//! The matching is found by memoized search over the set of matched
//! vertices, always branching on the lowest unmatched one.

use crate::error::{Error, Result};
use crate::pack::{CoSchedule, Pack, PackMember};
use crate::workload::Workload;

/// Largest task count [`exact_k2`] accepts by default; the memo table has
/// `2^n` entries.
pub const DEFAULT_MATCHING_LIMIT: usize = 20;

/// Cost of pairing tasks `a` and `b`, and the processors given to `b`
/// (`a` gets the rest). `None` when `p < 2`.
pub fn pair_weight(workload: &Workload, a: usize, b: usize) -> Option<(f64, usize)> {
    let p = workload.p();
    (1..p)
        .map(|j| (workload.time(a, p - j).max(workload.time(b, j)), j))
        .fold(None, |best: Option<(f64, usize)>, cand| match best {
            Some(b) if b.0 <= cand.0 => Some(b),
            _ => Some(cand),
        })
}

#[derive(Clone, Copy)]
enum Choice {
    Alone,
    With {
        partner: usize,
        partner_procs: usize,
    },
}

/// Optimal co-schedule with at most two tasks per pack.
pub fn exact_k2(workload: &Workload, limit: usize) -> Result<(CoSchedule, f64)> {
    let n = workload.n();
    if n > limit || n >= usize::BITS as usize {
        return Err(Error::BudgetExceeded {
            count: n as u128,
            cap: limit as u128,
        });
    }
    let p = workload.p();
    let weights: Vec<Vec<Option<(f64, usize)>>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    if a < b {
                        pair_weight(workload, a, b)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();

    let full = (1usize << n) - 1;
    // memo[mask] = (cost of matching the vertices outside mask, first choice)
    let mut memo: Vec<Option<(f64, Choice)>> = vec![None; 1 << n];
    solve(full, 0, workload, &weights, &mut memo);

    let mut packs = Vec::new();
    let mut mask = 0usize;
    while mask != full {
        let i = (!mask).trailing_zeros() as usize;
        let (_, choice) = memo[mask].expect("solved");
        match choice {
            Choice::Alone => {
                packs.push(Pack::new(workload, vec![PackMember { task: i, procs: p }]));
                mask |= 1 << i;
            }
            Choice::With {
                partner,
                partner_procs,
            } => {
                let members = vec![
                    PackMember {
                        task: i,
                        procs: p - partner_procs,
                    },
                    PackMember {
                        task: partner,
                        procs: partner_procs,
                    },
                ];
                packs.push(Pack::new(workload, members));
                mask |= 1 << i | 1 << partner;
            }
        }
    }
    let schedule = CoSchedule::new(packs);
    let cost = schedule.total_cost;
    Ok((schedule, cost))
}

fn solve(
    full: usize,
    mask: usize,
    workload: &Workload,
    weights: &[Vec<Option<(f64, usize)>>],
    memo: &mut [Option<(f64, Choice)>],
) -> f64 {
    if mask == full {
        return 0.0;
    }
    if let Some((cost, _)) = memo[mask] {
        return cost;
    }
    let i = (!mask).trailing_zeros() as usize;
    let mut best = (
        workload.time(i, workload.p()) + solve(full, mask | 1 << i, workload, weights, memo),
        Choice::Alone,
    );
    for partner in i + 1..weights.len() {
        if mask >> partner & 1 == 1 {
            continue;
        }
        if let Some((w, partner_procs)) = weights[i][partner] {
            let rest = solve(full, mask | 1 << i | 1 << partner, workload, weights, memo);
            if w + rest < best.0 {
                best = (
                    w + rest,
                    Choice::With {
                        partner,
                        partner_procs,
                    },
                );
            }
        }
    }
    memo[mask] = Some(best);
    best.0
}
