//! Co-scheduling heuristics: Random-Pack, Random-Proc, Pack-by-Pack and
//! Pack-Approx, each in single-run and multi-run form.
//!
//! Randomized heuristics draw from ChaCha8 streams. Run `r` of a multi-run
//! heuristic uses the stream seeded with [`child_seed`]`(seed, r)`, so the
//! single-run variant is always run 0 of the nine-run variant.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx::pack_approx;
use crate::error::{Error, Result};
use crate::pack::{check_k, make_packs, optimal_pack, time_order, Allocation, CoSchedule, Pack};
use crate::workload::Workload;

/// Epsilons of the nine-run Pack-by-Pack: 0.1, 0.2, ..., 0.9.
pub fn epsilon_sweep() -> Vec<f64> {
    evenly_spaced_epsilons(9)
}

/// `runs` epsilons `i / (runs + 1)`; one run gives 0.5.
pub fn evenly_spaced_epsilons(runs: usize) -> Vec<f64> {
    (1..=runs).map(|i| i as f64 / (runs + 1) as f64).collect()
}

/// Seed of run `run` derived from a master seed with the SplitMix64 output
/// function applied to `master + (run + 1) * 0x9E3779B97F4A7C15`.
pub fn child_seed(master: u64, run: u64) -> u64 {
    let mut z = master.wrapping_add(run.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for_run(master: u64, run: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(master, run))
}

/// Random packs of `1..=k` tasks, processors allocated optimally inside each.
pub fn random_pack<R: Rng + ?Sized>(
    workload: &Workload,
    k: usize,
    rng: &mut R,
) -> Result<CoSchedule> {
    check_k(workload, k)?;
    let mut remaining: Vec<usize> = (0..workload.n()).collect();
    let mut packs = Vec::new();
    while !remaining.is_empty() {
        let size = rng.gen_range(1..=k).min(remaining.len());
        let members: Vec<usize> = (0..size)
            .map(|_| {
                let at = rng.gen_range(0..remaining.len());
                remaining.swap_remove(at)
            })
            .collect();
        packs.push(optimal_pack(workload, &members)?);
    }
    Ok(CoSchedule::new(packs))
}

/// Uniform random processor counts, first-fit decreasing packs, then optimal
/// allocation inside each pack.
pub fn random_proc<R: Rng + ?Sized>(
    workload: &Workload,
    k: usize,
    rng: &mut R,
) -> Result<CoSchedule> {
    check_k(workload, k)?;
    let p = workload.p();
    let alloc = Allocation((0..workload.n()).map(|_| rng.gen_range(1..=p)).collect());
    Ok(make_packs(workload, &alloc, k)?.reallocate(workload))
}

/// State of the list when Pack-by-Pack closes a pack.
#[derive(Debug, Clone, PartialEq)]
pub struct Seal {
    /// Execution time of the head task.
    pub t_max: f64,
    /// `t(i, procs(i))` of each member at sealing time.
    pub member_times: Vec<f64>,
    /// The head task reached `p` processors and was packed alone.
    pub forced_singleton: bool,
}

/// Pack-by-Pack: grow the processor count of the longest task until the
/// tasks within a factor `1 - epsilon` of it request at least `p`
/// processors, then seal a pack greedily from them.
pub fn pack_by_pack(workload: &Workload, k: usize, epsilon: f64) -> Result<CoSchedule> {
    pack_by_pack_traced(workload, k, epsilon).map(|(s, _)| s)
}

/// [`pack_by_pack`] that also reports every sealed pack.
pub fn pack_by_pack_traced(
    workload: &Workload,
    k: usize,
    epsilon: f64,
) -> Result<(CoSchedule, Vec<Seal>)> {
    check_k(workload, k)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let p = workload.p();
    let mut procs = vec![1usize; workload.n()];
    let mut list: Vec<usize> = (0..workload.n()).collect();
    list.sort_by(|&a, &b| time_order(workload, &procs, a, b));

    let time = |procs: &[usize], i: usize| workload.time(i, procs[i]);
    let mut packs = Vec::new();
    let mut seals = Vec::new();

    while let Some(&head) = list.first() {
        let t_max = time(&procs, head);
        let threshold = (1.0 - epsilon) * t_max;
        let near = list
            .iter()
            .take_while(|&&i| time(&procs, i) >= threshold)
            .count();
        let requested: usize = list[..near].iter().map(|&i| procs[i]).sum();

        if requested >= p {
            let forced_singleton = procs[head] == p;
            let mut used = 0;
            let mut chosen = Vec::new();
            for &i in &list[..near] {
                if chosen.len() < k && used + procs[i] <= p {
                    used += procs[i];
                    chosen.push(i);
                }
            }
            seals.push(Seal {
                t_max,
                member_times: chosen.iter().map(|&i| time(&procs, i)).collect(),
                forced_singleton,
            });
            list.retain(|i| !chosen.contains(i));
            packs.push(chosen);
        } else {
            procs[head] += 1;
            list.remove(0);
            let at = list.partition_point(|&o| time_order(workload, &procs, o, head).is_lt());
            list.insert(at, head);
        }
    }

    let packs = packs
        .iter()
        .map(|members| optimal_pack(workload, members))
        .collect::<Result<Vec<Pack>>>()?;
    Ok((CoSchedule::new(packs), seals))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HeuristicKind {
    RandomPack,
    RandomProc,
    PackByPack,
    PackApprox,
}

impl HeuristicKind {
    fn tag(self) -> &'static str {
        match self {
            HeuristicKind::RandomPack => "random-pack",
            HeuristicKind::RandomProc => "random-proc",
            HeuristicKind::PackByPack => "pack-by-pack",
            HeuristicKind::PackApprox => "pack-approx",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicSpec {
    pub kind: HeuristicKind,
    /// Independent runs of a random heuristic.
    pub runs: usize,
    /// Pack-by-Pack epsilons, one run each.
    pub epsilons: Vec<f64>,
    pub seed: u64,
}

impl HeuristicSpec {
    pub fn new(kind: HeuristicKind, runs: usize, seed: u64) -> Self {
        let epsilons = match kind {
            HeuristicKind::PackByPack => evenly_spaced_epsilons(runs),
            _ => Vec::new(),
        };
        HeuristicSpec {
            kind,
            runs,
            epsilons,
            seed,
        }
    }

    /// The seven variants compared in the experiments.
    pub fn standard_set(seed: u64) -> Vec<HeuristicSpec> {
        use HeuristicKind::*;
        vec![
            HeuristicSpec::new(RandomPack, 1, seed),
            HeuristicSpec::new(RandomPack, 9, seed),
            HeuristicSpec::new(RandomProc, 1, seed),
            HeuristicSpec::new(RandomProc, 9, seed),
            HeuristicSpec::new(PackApprox, 1, seed),
            HeuristicSpec::new(PackByPack, 1, seed),
            HeuristicSpec::new(PackByPack, 9, seed),
        ]
    }

    pub fn check(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidSpec("runs must be at least 1".into()));
        }
        if self.kind == HeuristicKind::PackByPack {
            if self.epsilons.is_empty() {
                return Err(Error::InvalidSpec("pack-by-pack needs an epsilon".into()));
            }
            if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
                return Err(Error::InvalidSpec(format!("epsilon {e} outside (0, 1)")));
            }
        }
        Ok(())
    }

    /// Name like `random-pack-9`, `pack-by-pack-1` or `pack-approx`.
    pub fn name(&self) -> String {
        match self.kind {
            HeuristicKind::PackApprox => self.kind.tag().to_owned(),
            HeuristicKind::PackByPack => format!("{}-{}", self.kind.tag(), self.epsilons.len()),
            _ => format!("{}-{}", self.kind.tag(), self.runs),
        }
    }
}

impl fmt::Display for HeuristicSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for HeuristicKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            HeuristicKind::RandomPack,
            HeuristicKind::RandomProc,
            HeuristicKind::PackByPack,
            HeuristicKind::PackApprox,
        ]
        .into_iter()
        .find(|k| k.tag() == s)
        .ok_or_else(|| Error::InvalidSpec(format!("unknown heuristic {s:?}")))
    }
}

/// Parses `random-pack-9`, `pack-by-pack-1`, `pack-approx`, or a bare kind
/// (one run) with seed 0.
impl FromStr for HeuristicSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(kind) = s.parse::<HeuristicKind>() {
            return Ok(HeuristicSpec::new(kind, 1, 0));
        }
        let (kind, runs) = s
            .rsplit_once('-')
            .ok_or_else(|| Error::InvalidSpec(format!("unknown heuristic {s:?}")))?;
        let kind: HeuristicKind = kind.parse()?;
        let runs: usize = runs
            .parse()
            .map_err(|_| Error::InvalidSpec(format!("bad run count in {s:?}")))?;
        let spec = HeuristicSpec::new(kind, runs, 0);
        spec.check()?;
        Ok(spec)
    }
}

/// Result of a possibly multi-run heuristic.
#[derive(Debug, Clone, PartialEq)]
pub struct BestOf {
    pub schedule: CoSchedule,
    /// Cost of every run, in run order.
    pub run_costs: Vec<f64>,
    /// Index of the winning run (earliest among equal costs).
    pub best_run: usize,
    /// Winning epsilon for Pack-by-Pack.
    pub epsilon: Option<f64>,
}

/// Runs the heuristic described by `spec` and keeps the cheapest schedule.
pub fn best_of(spec: &HeuristicSpec, workload: &Workload, k: usize) -> Result<BestOf> {
    spec.check()?;
    check_k(workload, k)?;
    let schedules: Vec<CoSchedule> = match spec.kind {
        HeuristicKind::RandomPack => (0..spec.runs as u64)
            .map(|r| random_pack(workload, k, &mut rng_for_run(spec.seed, r)))
            .collect::<Result<_>>()?,
        HeuristicKind::RandomProc => (0..spec.runs as u64)
            .map(|r| random_proc(workload, k, &mut rng_for_run(spec.seed, r)))
            .collect::<Result<_>>()?,
        HeuristicKind::PackByPack => spec
            .epsilons
            .iter()
            .map(|&eps| pack_by_pack(workload, k, eps))
            .collect::<Result<_>>()?,
        HeuristicKind::PackApprox => vec![pack_approx(workload, k)?.0],
    };

    let run_costs: Vec<f64> = schedules.iter().map(|s| s.total_cost).collect();
    let best_run = run_costs.iter().enumerate().fold(
        0,
        |best, (i, &c)| if c < run_costs[best] { i } else { best },
    );
    let epsilon = (spec.kind == HeuristicKind::PackByPack).then(|| spec.epsilons[best_run]);
    let schedule = schedules
        .into_iter()
        .nth(best_run)
        .expect("at least one run");
    Ok(BestOf {
        schedule,
        run_costs,
        best_run,
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pack::{evaluate, PackMember};

    fn members(pack: &Pack) -> Vec<(usize, usize)> {
        pack.members
            .iter()
            .map(|&PackMember { task, procs }| (task, procs))
            .collect()
    }

    fn small() -> Workload {
        Workload::from_times(
            4,
            vec![
                vec![12.0, 7.0, 5.0, 4.0],
                vec![10.0, 6.0, 4.5, 3.6],
                vec![3.0, 2.0, 1.8, 1.6],
                vec![6.0, 3.5, 2.5, 2.0],
                vec![9.0, 5.0, 4.0, 3.2],
                vec![2.0, 1.5, 1.2, 1.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn k_one_gives_full_machine_singletons() {
        let w = small();
        let baseline: f64 = crate::pack::sum_ascending((0..w.n()).map(|i| w.time(i, 4)));
        let mut rng = rng_for_run(7, 0);
        assert_eq!(random_pack(&w, 1, &mut rng).unwrap().total_cost, baseline);
        assert_eq!(random_proc(&w, 1, &mut rng).unwrap().total_cost, baseline);
        assert_eq!(pack_by_pack(&w, 1, 0.5).unwrap().total_cost, baseline);
    }

    #[test]
    fn single_task_everywhere() {
        let w = Workload::from_times(3, vec![vec![6.0, 4.0, 3.0]]).unwrap();
        for spec in HeuristicSpec::standard_set(11) {
            assert_eq!(
                best_of(&spec, &w, 2).unwrap().schedule.total_cost,
                3.0,
                "{spec}"
            );
        }
    }

    #[test]
    fn random_heuristics_are_deterministic() {
        let w = small();
        let a = random_pack(&w, 3, &mut rng_for_run(42, 0)).unwrap();
        let b = random_pack(&w, 3, &mut rng_for_run(42, 0)).unwrap();
        assert_eq!(a, b);
        let a = random_proc(&w, 3, &mut rng_for_run(42, 3)).unwrap();
        let b = random_proc(&w, 3, &mut rng_for_run(42, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_proc_on_one_processor() {
        let w = Workload::from_times(1, vec![vec![5.0], vec![3.0], vec![4.0]]).unwrap();
        let s = random_proc(&w, 1, &mut rng_for_run(1, 0)).unwrap();
        assert_eq!(s.packs.len(), 3);
        assert_eq!(s.total_cost, 12.0);
    }

    #[test]
    fn pack_by_pack_pairs_identical_tasks() {
        let w = Workload::from_times(2, vec![vec![4.0, 3.0], vec![4.0, 3.0]]).unwrap();
        let (s, seals) = pack_by_pack_traced(&w, 2, 0.5).unwrap();
        assert_eq!(s.packs.len(), 1);
        assert_eq!(members(&s.packs[0]), vec![(0, 1), (1, 1)]);
        assert_eq!(s.total_cost, 4.0);
        assert_eq!(seals.len(), 1);
        assert!(!seals[0].forced_singleton);
    }

    #[test]
    fn pack_by_pack_single_task() {
        let w = Workload::from_times(3, vec![vec![6.0, 4.0, 3.0]]).unwrap();
        let (s, seals) = pack_by_pack_traced(&w, 3, 0.3).unwrap();
        assert_eq!(s.total_cost, 3.0);
        assert!(seals[0].forced_singleton);
    }

    #[test]
    fn pack_by_pack_seals_are_balanced() {
        let w = small();
        for eps in epsilon_sweep() {
            let (s, seals) = pack_by_pack_traced(&w, 3, eps).unwrap();
            assert!(evaluate(&w, &s, Some(3)).is_ok());
            for seal in seals.iter().filter(|s| !s.forced_singleton) {
                for &t in &seal.member_times {
                    assert!(t <= seal.t_max && t >= (1.0 - eps) * seal.t_max);
                }
            }
        }
    }

    #[test]
    fn bad_specs_are_rejected() {
        let w = small();
        assert!(pack_by_pack(&w, 2, 0.0).is_err());
        assert!(pack_by_pack(&w, 2, 1.0).is_err());
        let mut spec = HeuristicSpec::new(HeuristicKind::PackByPack, 1, 0);
        spec.epsilons.clear();
        assert!(best_of(&spec, &w, 2).is_err());
        assert!(best_of(&HeuristicSpec::new(HeuristicKind::RandomPack, 0, 0), &w, 2).is_err());
        assert!(best_of(&HeuristicSpec::new(HeuristicKind::RandomPack, 1, 0), &w, 5).is_err());
    }

    #[test]
    fn names_round_trip() {
        for spec in HeuristicSpec::standard_set(0) {
            let parsed: HeuristicSpec = spec.name().parse().unwrap();
            assert_eq!(parsed, spec);
        }
        assert!("random-walk-3".parse::<HeuristicSpec>().is_err());
    }

    #[test]
    fn nine_runs_never_lose_to_one() {
        let w = small();
        for kind in [
            HeuristicKind::RandomPack,
            HeuristicKind::RandomProc,
            HeuristicKind::PackByPack,
        ] {
            for k in 1..=4 {
                let one = best_of(&HeuristicSpec::new(kind, 1, 99), &w, k).unwrap();
                let nine = best_of(&HeuristicSpec::new(kind, 9, 99), &w, k).unwrap();
                assert!(nine.schedule.total_cost <= one.schedule.total_cost);
                assert_eq!(nine.run_costs.len(), 9);
            }
        }
        let nine = best_of(&HeuristicSpec::new(HeuristicKind::PackByPack, 9, 0), &w, 4).unwrap();
        assert_eq!(nine.epsilon, Some(epsilon_sweep()[nine.best_run]));
    }
}
