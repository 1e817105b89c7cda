#![allow(dead_code)]

use copack::workload::{normalize, validate};
use copack::{SpeedupProfile, Workload};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random profile satisfying both model rules. With `coarse`, times are
/// drawn on a half-unit grid first so that ties are common.
pub fn random_profile<R: Rng>(rng: &mut R, p: usize, coarse: bool) -> SpeedupProfile {
    let mut times = Vec::with_capacity(p);
    let mut t: f64 = if coarse {
        rng.gen_range(2..40) as f64 / 2.0
    } else {
        rng.gen_range(1.0..100.0)
    };
    times.push(t);
    for j in 1..p {
        let floor = t * j as f64 / (j + 1) as f64;
        let mut next = match rng.gen_range(0..4) {
            0 => t,
            1 => floor,
            _ => rng.gen_range(floor..=t),
        };
        if coarse {
            next = (next * 2.0).ceil() / 2.0;
            next = next.min(t);
        }
        t = next;
        times.push(t);
    }
    normalize(&times).expect("positive times")
}

pub fn random_workload<R: Rng>(rng: &mut R, n: usize, p: usize) -> Workload {
    let coarse = rng.gen_bool(0.5);
    let rows = (0..n)
        .map(|_| random_profile(rng, p, coarse).times().to_vec())
        .collect();
    let w = Workload::from_times(p, rows).expect("valid dimensions");
    assert!(validate(&w).is_empty());
    w
}

/// Every allocation of at least one processor per task using at most `p`
/// processors in total.
pub fn allocations(tasks: usize, p: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, budget: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for j in 1..=budget.saturating_sub(left - 1) {
            cur.push(j);
            go(left - 1, budget - j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if tasks <= p {
        go(tasks, p, &mut Vec::new(), &mut out);
    }
    out
}

/// Best pack duration for `tasks` by trying every allocation.
pub fn brute_pack_cost(w: &Workload, tasks: &[usize]) -> Option<f64> {
    allocations(tasks.len(), w.p())
        .into_iter()
        .map(|alloc| {
            tasks
                .iter()
                .zip(&alloc)
                .map(|(&t, &j)| w.time(t, j))
                .fold(0.0, f64::max)
        })
        .min_by(f64::total_cmp)
}

/// Optimal co-schedule cost by dynamic programming over task subsets: the
/// pack holding the lowest remaining task is chosen among all subsets of at
/// most `min(k, p)` tasks.
pub fn brute_opt(w: &Workload, k: usize) -> f64 {
    let n = w.n();
    let cap = k.min(w.p());
    let full = (1usize << n) - 1;
    let pack_cost: Vec<Option<f64>> = (0..=full)
        .map(|mask| {
            let tasks: Vec<usize> = (0..n).filter(|t| mask >> t & 1 == 1).collect();
            if tasks.is_empty() || tasks.len() > cap {
                None
            } else {
                brute_pack_cost(w, &tasks)
            }
        })
        .collect();
    let mut best = vec![f64::INFINITY; full + 1];
    best[0] = 0.0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let pack = sub | low;
            if let Some(c) = pack_cost[pack] {
                best[mask] = best[mask].min(c + best[mask ^ pack]);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    best[full]
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}
