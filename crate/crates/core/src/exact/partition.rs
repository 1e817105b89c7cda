use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::pack::{optimal_pack, sum_ascending, CoSchedule};
use crate::workload::Workload;

/// Partition budget used when none is configured: Bell(10), so any workload
/// of up to ten tasks can be searched for any pack size.
pub const DEFAULT_PARTITION_BUDGET: u128 = 115_975;

/// Number of partitions of `n` elements into blocks of at most `max_block`
/// elements: `B(n) = sum_{s=1..max_block} C(n-1, s-1) B(n-s)`.
/// Saturates at `u128::MAX`.
pub fn restricted_bell(n: usize, max_block: usize) -> u128 {
    let mut binom = vec![vec![0u128; n + 1]; n + 1];
    for a in 0..=n {
        binom[a][0] = 1;
        for b in 1..=a {
            binom[a][b] = binom[a - 1][b - 1].saturating_add(binom[a - 1][b]);
        }
    }
    let mut bell = vec![0u128; n + 1];
    bell[0] = 1;
    for m in 1..=n {
        bell[m] = (1..=max_block.min(m)).fold(0u128, |acc, s| {
            acc.saturating_add(binom[m - 1][s - 1].saturating_mul(bell[m - s]))
        });
    }
    bell[n]
}

/// Calls `visit` with every restricted-growth string of length `n` whose
/// blocks hold at most `max_block` elements, in lexicographic order.
/// `rgs[i]` is the block of element `i`; blocks are numbered by first element.
pub fn for_each_partition(n: usize, max_block: usize, mut visit: impl FnMut(&[usize])) {
    fn go(
        rgs: &mut Vec<usize>,
        sizes: &mut Vec<usize>,
        n: usize,
        max_block: usize,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if rgs.len() == n {
            visit(rgs);
            return;
        }
        for b in 0..=sizes.len() {
            if b == sizes.len() {
                sizes.push(0);
            }
            if sizes[b] < max_block {
                sizes[b] += 1;
                rgs.push(b);
                go(rgs, sizes, n, max_block, visit);
                rgs.pop();
                sizes[b] -= 1;
            }
            if sizes[b] == 0 {
                sizes.pop();
            }
        }
    }
    if max_block == 0 && n > 0 {
        return;
    }
    go(
        &mut Vec::with_capacity(n),
        &mut Vec::new(),
        n,
        max_block,
        &mut visit,
    );
}

/// Number of partitions visited by [`for_each_partition`].
pub fn count_partitions(n: usize, max_block: usize) -> u128 {
    let mut count = 0u128;
    for_each_partition(n, max_block, |_| count += 1);
    count
}

fn blocks_of(rgs: &[usize]) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (task, &b) in rgs.iter().enumerate() {
        if b == blocks.len() {
            blocks.push(Vec::new());
        }
        blocks[b].push(task);
    }
    blocks
}

/// Minimum-cost co-schedule over all partitions into packs of at most
/// `min(k, p)` tasks, each pack allocated optimally. Fails with
/// [`Error::BudgetExceeded`] when there are more than `budget` partitions.
pub fn exhaustive_opt(workload: &Workload, k: usize, budget: u128) -> Result<(CoSchedule, f64)> {
    crate::pack::check_k(workload, k)?;
    let n = workload.n();
    let max_block = k.min(workload.p());
    let count = restricted_bell(n, max_block);
    if count > budget || n > 64 {
        return Err(Error::BudgetExceeded { count, cap: budget });
    }

    let mut block_cost: HashMap<u64, f64> = HashMap::new();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut masks: Vec<u64> = Vec::with_capacity(n);

    for_each_partition(n, max_block, |rgs| {
        masks.clear();
        for (task, &b) in rgs.iter().enumerate() {
            if b == masks.len() {
                masks.push(0);
            }
            masks[b] |= 1 << task;
        }
        let cost = sum_ascending(masks.iter().map(|&mask| {
            *block_cost.entry(mask).or_insert_with(|| {
                let tasks: Vec<usize> = (0..n).filter(|t| mask >> t & 1 == 1).collect();
                optimal_pack(workload, &tasks).expect("block fits").cost
            })
        }));
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, rgs.to_vec()));
        }
    });

    let (_, rgs) = best.expect("a workload has at least one partition");
    let packs = blocks_of(&rgs)
        .iter()
        .map(|block| optimal_pack(workload, block))
        .collect::<Result<Vec<_>>>()?;
    let schedule = CoSchedule::new(packs);
    let cost = schedule.total_cost;
    Ok((schedule, cost))
}
