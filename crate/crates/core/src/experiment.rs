//! Benchmark sweeps: every solver at every pack size on one workload, with
//! quality measures and wall-clock time per cell.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{exact_k2, exhaustive_opt, DEFAULT_MATCHING_LIMIT, DEFAULT_PARTITION_BUDGET};
use crate::heuristics::{best_of, HeuristicSpec};
use crate::metrics::{metrics, MetricsReport};
use crate::pack::{CoSchedule, ScheduleDoc};
use crate::workload::Workload;

/// Pack sizes swept by default.
pub const DEFAULT_K_VALUES: [usize; 8] = [2, 4, 6, 8, 10, 12, 14, 16];

/// CSV header of a sweep report.
pub const CSV_COLUMNS: [&str; 9] = [
    "workload",
    "heuristic",
    "k",
    "cost",
    "rel_cost",
    "packing_ratio",
    "rel_response",
    "ms",
    "seed",
];

/// Anything that turns a workload and a pack size into a co-schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum Solver {
    Heuristic(HeuristicSpec),
    /// Enumerates all partitions, up to `budget` of them.
    Exhaustive {
        budget: u128,
    },
    /// Matching-based optimum; only defined for `k = 2`.
    ExactK2,
}

impl Solver {
    pub fn name(&self) -> String {
        match self {
            Solver::Heuristic(spec) => spec.name(),
            Solver::Exhaustive { .. } => "exhaustive".into(),
            Solver::ExactK2 => "exact-k2".into(),
        }
    }

    /// Same solver with its seed replaced (no-op for deterministic ones).
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let Solver::Heuristic(spec) = &mut self {
            spec.seed = seed;
        }
        self
    }

    pub fn standard_set(seed: u64) -> Vec<Solver> {
        HeuristicSpec::standard_set(seed)
            .into_iter()
            .map(Solver::Heuristic)
            .collect()
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Solver::Exhaustive {
                budget: DEFAULT_PARTITION_BUDGET,
            }),
            "exact-k2" => Ok(Solver::ExactK2),
            _ => s.parse().map(Solver::Heuristic),
        }
    }
}

/// A solved cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub schedule: CoSchedule,
    /// Per-run costs of multi-run heuristics.
    pub run_costs: Vec<f64>,
    /// Winning epsilon of Pack-by-Pack.
    pub epsilon: Option<f64>,
}

pub fn solve(workload: &Workload, k: usize, solver: &Solver) -> Result<Solved> {
    match solver {
        Solver::Heuristic(spec) => {
            let best = best_of(spec, workload, k)?;
            Ok(Solved {
                schedule: best.schedule,
                run_costs: best.run_costs,
                epsilon: best.epsilon,
            })
        }
        Solver::Exhaustive { budget } => {
            let (schedule, cost) = exhaustive_opt(workload, k, *budget)?;
            Ok(Solved {
                schedule,
                run_costs: vec![cost],
                epsilon: None,
            })
        }
        Solver::ExactK2 => {
            if k != 2 {
                return Err(Error::InvalidSpec(format!("exact-k2 needs k=2, got k={k}")));
            }
            crate::pack::check_k(workload, k)?;
            let (schedule, cost) = exact_k2(workload, DEFAULT_MATCHING_LIMIT)?;
            Ok(Solved {
                schedule,
                run_costs: vec![cost],
                epsilon: None,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Label written in the `workload` column.
    pub workload_id: String,
    pub k_values: Vec<usize>,
    pub solvers: Vec<Solver>,
    pub seed: u64,
}

impl ExperimentConfig {
    /// The seven standard heuristics over the given pack sizes.
    pub fn standard(workload_id: impl Into<String>, k_values: Vec<usize>, seed: u64) -> Self {
        ExperimentConfig {
            workload_id: workload_id.into(),
            k_values,
            solvers: Solver::standard_set(seed),
            seed,
        }
    }

    pub fn check(&self, workload: &Workload) -> Result<()> {
        if self.k_values.is_empty() || self.solvers.is_empty() {
            return Err(Error::InvalidSpec(
                "a sweep needs at least one k and one solver".into(),
            ));
        }
        if let Some(&k) = self.k_values.iter().find(|&&k| k == 0 || k > workload.p()) {
            return Err(Error::InvalidPackSize { k, p: workload.p() });
        }
        Ok(())
    }
}

fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.3e}").parse().expect("formatted float parses")
}

fn ser_sig<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    x.map(round_sig).serialize(s)
}

fn ser_ms<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    round_ms(*x).serialize(s)
}

fn round_ms(ms: f64) -> f64 {
    (ms * 1000.0).round() / 1000.0
}

/// One `(solver, k)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub workload: String,
    pub heuristic: String,
    pub k: usize,
    pub cost: Option<f64>,
    #[serde(serialize_with = "ser_sig")]
    pub rel_cost: Option<f64>,
    #[serde(serialize_with = "ser_sig")]
    pub packing_ratio: Option<f64>,
    #[serde(serialize_with = "ser_sig")]
    pub rel_response: Option<f64>,
    #[serde(serialize_with = "ser_ms")]
    pub ms: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleDoc>,
}

impl ReportRow {
    /// Columns that do not depend on timing.
    pub fn deterministic_part(&self) -> impl PartialEq + fmt::Debug + '_ {
        (
            &self.workload,
            &self.heuristic,
            self.k,
            self.cost.map(f64::to_bits),
            [self.rel_cost, self.packing_ratio, self.rel_response].map(|v| v.map(f64::to_bits)),
            self.seed,
            self.epsilon.map(f64::to_bits),
            &self.error,
            &self.schedule,
        )
    }

    fn csv_fields(&self) -> [String; 9] {
        let opt = |v: Option<f64>, round: bool| {
            v.map(|x| if round { round_sig(x) } else { x }.to_string())
                .unwrap_or_default()
        };
        [
            self.workload.clone(),
            self.heuristic.clone(),
            self.k.to_string(),
            opt(self.cost, false),
            opt(self.rel_cost, true),
            opt(self.packing_ratio, true),
            opt(self.rel_response, true),
            round_ms(self.ms).to_string(),
            self.seed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut out = csv::Writer::from_writer(out);
        out.write_record(CSV_COLUMNS)?;
        for row in &self.rows {
            out.write_record(row.csv_fields())?;
        }
        out.flush()
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }

    pub fn row(&self, heuristic: &str, k: usize) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.heuristic == heuristic && r.k == k)
    }
}

/// Runs one cell, timing only the solver call.
pub fn run_cell(
    workload_id: &str,
    workload: &Workload,
    k: usize,
    solver: &Solver,
    seed: u64,
) -> ReportRow {
    let start = Instant::now();
    let solved = solve(workload, k, solver);
    let ms = start.elapsed().as_secs_f64() * 1e3;

    let mut row = ReportRow {
        workload: workload_id.to_owned(),
        heuristic: solver.name(),
        k,
        cost: None,
        rel_cost: None,
        packing_ratio: None,
        rel_response: None,
        ms,
        seed,
        epsilon: None,
        error: None,
        schedule: None,
    };
    match solved.and_then(|s| metrics(workload, &s.schedule).map(|m| (s, m))) {
        Ok((solved, m)) => {
            let MetricsReport {
                relative_cost,
                packing_ratio,
                relative_response_time,
                ..
            } = m;
            row.cost = Some(solved.schedule.total_cost);
            row.rel_cost = Some(relative_cost);
            row.packing_ratio = Some(packing_ratio);
            row.rel_response = Some(relative_response_time);
            row.epsilon = solved.epsilon;
            row.schedule = Some(solved.schedule.to_doc(workload));
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs every `(solver, k)` cell in configuration order, solver-major.
/// Failing cells are recorded with an error message.
pub fn run_sweep(workload: &Workload, config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.check(workload)?;
    let rows = config
        .solvers
        .iter()
        .flat_map(|solver| config.k_values.iter().map(move |&k| (solver, k)))
        .map(|(solver, k)| {
            let solver = solver.clone().with_seed(config.seed);
            run_cell(&config.workload_id, workload, k, &solver, config.seed)
        })
        .collect();
    Ok(ExperimentReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn workload() -> Workload {
        Workload::from_times(
            4,
            vec![
                vec![12.0, 7.0, 5.0, 4.0],
                vec![10.0, 6.0, 4.5, 3.6],
                vec![3.0, 2.0, 1.8, 1.6],
                vec![6.0, 3.5, 2.5, 2.0],
            ],
        )
        .unwrap()
    }

    #[test]
    fn sweep_covers_every_cell() {
        let w = workload();
        let config = ExperimentConfig::standard("small", vec![1, 2, 4], 5);
        let report = run_sweep(&w, &config).unwrap();
        assert_eq!(report.rows.len(), 21);
        for row in &report.rows {
            assert!(row.error.is_none(), "{row:?}");
            if row.k == 1 {
                assert_eq!(row.rel_cost, Some(1.0), "{}", row.heuristic);
            }
        }
        assert_eq!(report.rows[0].heuristic, "random-pack-1");
        assert_eq!(report.rows[0].k, 1);
    }

    #[test]
    fn failing_cells_are_recorded() {
        let w = workload();
        let config = ExperimentConfig {
            workload_id: "small".into(),
            k_values: vec![2, 3],
            solvers: vec![Solver::ExactK2, Solver::Exhaustive { budget: 3 }],
            seed: 0,
        };
        let report = run_sweep(&w, &config).unwrap();
        assert!(report.row("exact-k2", 2).unwrap().error.is_none());
        assert!(report.row("exact-k2", 3).unwrap().error.is_some());
        let row = report.row("exhaustive", 2).unwrap();
        assert!(row.error.as_deref().unwrap().contains("budget"));
        assert_eq!(row.cost, None);
    }

    #[test]
    fn config_is_checked() {
        let w = workload();
        assert!(run_sweep(&w, &ExperimentConfig::standard("x", vec![], 0)).is_err());
        assert!(run_sweep(&w, &ExperimentConfig::standard("x", vec![5], 0)).is_err());
    }

    #[test]
    fn solver_names_parse() {
        for name in ["exhaustive", "exact-k2", "pack-approx", "random-proc-9"] {
            assert_eq!(name.parse::<Solver>().unwrap().name(), name);
        }
    }

    #[test]
    fn significant_digit_rounding() {
        assert_eq!(round_sig(0.123456), 0.1235);
        assert_eq!(round_sig(1.0), 1.0);
        assert_eq!(round_sig(12346.0), 12350.0);
    }
}
