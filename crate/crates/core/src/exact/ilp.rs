//! Integer program of the co-scheduling problem in CPLEX LP format.
//!
//! Binary `x_i_j_b` is 1 when task `i` runs on `j` processors in pack `b`;
//! continuous `y_b` is the duration of pack `b` (0 for an empty pack). All
//! indices are 1-based:
//!
//! ```text
//! minimize   sum_b y_b
//! assign_i:  sum_{j,b} x_i_j_b = 1                  (each task placed once)
//! card_b:    sum_{i,j} x_i_j_b <= k                 (at most k tasks)
//! cap_b:     sum_{i,j} j x_i_j_b <= p               (at most p processors)
//! cost_i_j_b: t(i,j) x_i_j_b - y_b <= 0             (pack lasts its longest task)
//! ```

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pack::{sum_ascending, CoSchedule, Pack, PackMember};
use crate::workload::Workload;

const INTEGRALITY_TOL: f64 = 1e-6;
const FEASIBILITY_TOL: f64 = 1e-6;

/// Constraint family of the integer program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IlpConstraint {
    /// (i) every task in exactly one pack with one processor count.
    Assignment,
    /// (ii) at most `k` tasks per pack.
    Cardinality,
    /// (iii) at most `p` processors per pack.
    Capacity,
    /// (iv) `t(i,j) x_i_j_b <= y_b`.
    PackCost,
    /// `x` must be 0 or 1.
    Integrality,
    /// `y_b >= 0`.
    Bounds,
}

impl fmt::Display for IlpConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IlpConstraint::Assignment => "(i) assignment",
            IlpConstraint::Cardinality => "(ii) cardinality",
            IlpConstraint::Capacity => "(iii) capacity",
            IlpConstraint::PackCost => "(iv) pack cost",
            IlpConstraint::Integrality => "integrality",
            IlpConstraint::Bounds => "bounds",
        })
    }
}

/// Size of the model built for a workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IlpModel {
    pub n: usize,
    pub p: usize,
    pub k: usize,
}

impl IlpModel {
    /// `n^2 p` binaries `x_i_j_b`.
    pub fn binaries(&self) -> usize {
        self.n * self.n * self.p
    }

    /// `n` continuous `y_b`.
    pub fn continuous(&self) -> usize {
        self.n
    }

    /// Rows per family, in the order (i), (ii), (iii), (iv).
    pub fn constraint_counts(&self) -> [usize; 4] {
        [self.n, self.n, self.n, self.n * self.n * self.p]
    }

    pub fn constraints(&self) -> usize {
        self.constraint_counts().iter().sum()
    }
}

pub fn x_name(task: usize, procs: usize, pack: usize) -> String {
    format!("x_{}_{}_{}", task + 1, procs, pack + 1)
}

pub fn y_name(pack: usize) -> String {
    format!("y_{}", pack + 1)
}

pub fn build_ilp(workload: &Workload, k: usize) -> IlpModel {
    IlpModel {
        n: workload.n(),
        p: workload.p(),
        k,
    }
}

/// Writes the model as LP text.
pub fn write_lp<W: Write>(workload: &Workload, k: usize, out: &mut W) -> io::Result<IlpModel> {
    let model = build_ilp(workload, k);
    let (n, p) = (model.n, model.p);
    let packs = 0..n;

    writeln!(
        out,
        "\\ co-scheduling of {n} tasks on {p} processors, at most {k} per pack"
    )?;
    writeln!(out, "Minimize")?;
    let objective: Vec<String> = packs.clone().map(y_name).collect();
    writeln!(out, " obj: {}", objective.join(" + "))?;

    writeln!(out, "Subject To")?;
    for i in 0..n {
        let terms: Vec<String> = packs
            .clone()
            .flat_map(|b| (1..=p).map(move |j| x_name(i, j, b)))
            .collect();
        writeln!(out, " assign_{}: {} = 1", i + 1, terms.join(" + "))?;
    }
    for b in packs.clone() {
        let terms: Vec<String> = (0..n)
            .flat_map(|i| (1..=p).map(move |j| x_name(i, j, b)))
            .collect();
        writeln!(out, " card_{}: {} <= {k}", b + 1, terms.join(" + "))?;
    }
    for b in packs.clone() {
        let terms: Vec<String> = (0..n)
            .flat_map(|i| (1..=p).map(move |j| format!("{j} {}", x_name(i, j, b))))
            .collect();
        writeln!(out, " cap_{}: {} <= {p}", b + 1, terms.join(" + "))?;
    }
    for i in 0..n {
        for j in 1..=p {
            for b in packs.clone() {
                writeln!(
                    out,
                    " cost_{}_{}_{}: {} {} - {} <= 0",
                    i + 1,
                    j,
                    b + 1,
                    workload.time(i, j),
                    x_name(i, j, b),
                    y_name(b)
                )?;
            }
        }
    }

    writeln!(out, "Bounds")?;
    for b in packs.clone() {
        writeln!(out, " {} >= 0", y_name(b))?;
    }
    writeln!(out, "Binaries")?;
    for i in 0..n {
        for j in 1..=p {
            for b in packs.clone() {
                writeln!(out, " {}", x_name(i, j, b))?;
            }
        }
    }
    writeln!(out, "End")?;
    Ok(model)
}

/// Writes the LP file for `(workload, k)` to `path`.
pub fn export_ilp(workload: &Workload, k: usize, path: impl AsRef<Path>) -> Result<IlpModel> {
    let mut out = BufWriter::new(File::create(path)?);
    let model = write_lp(workload, k, &mut out)?;
    out.flush()?;
    Ok(model)
}

/// Variable values keyed by LP name.
pub type SolutionValues = HashMap<String, f64>;

/// Reads `name value` lines; blank lines and lines starting with `#` are
/// skipped.
pub fn parse_solution(text: &str) -> Result<SolutionValues> {
    let mut values = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parsed = match (fields.next(), fields.next(), fields.next()) {
            (Some(name), Some(value), None) => value.parse::<f64>().ok().map(|v| (name, v)),
            _ => None,
        };
        let (name, value) = parsed.ok_or_else(|| Error::Parse {
            path: None,
            line: Some(lineno + 1),
            context: format!("expected `name value`, found {line:?}"),
        })?;
        values.insert(name.to_owned(), value);
    }
    Ok(values)
}

/// Outcome of checking an assignment against the model.
#[derive(Debug, Clone, PartialEq)]
pub struct IlpVerdict {
    /// `sum_b y_b`.
    pub objective: f64,
    /// Co-schedule read off the non-empty packs, in pack order.
    pub schedule: CoSchedule,
    /// Every `y_b` equals the duration of pack `b` (0 when empty), so the
    /// objective is the schedule's cost.
    pub tight: bool,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= FEASIBILITY_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Checks constraints (i)-(iv) and integrality of an assignment.
/// Variables missing from `values` are taken as 0.
pub fn verify_ilp_solution(
    workload: &Workload,
    k: usize,
    values: &SolutionValues,
) -> Result<IlpVerdict> {
    let (n, p) = (workload.n(), workload.p());
    let fail = |constraint, detail: String| Err(Error::InfeasibleAssignment { constraint, detail });
    let get = |name: &str| values.get(name).copied().unwrap_or(0.0);

    // x[b][i] = Some(j) when task i runs on j processors in pack b
    let mut placed: Vec<Vec<Option<usize>>> = vec![vec![None; n]; n];
    let mut placements = vec![0usize; n];
    for i in 0..n {
        for j in 1..=p {
            for (b, row) in placed.iter_mut().enumerate() {
                let name = x_name(i, j, b);
                let x = get(&name);
                if x.abs() <= INTEGRALITY_TOL {
                    continue;
                }
                if (x - 1.0).abs() > INTEGRALITY_TOL {
                    return fail(IlpConstraint::Integrality, format!("{name} = {x}"));
                }
                row[i] = Some(j);
                placements[i] += 1;
            }
        }
    }
    if let Some(i) = placements.iter().position(|&c| c != 1) {
        return fail(
            IlpConstraint::Assignment,
            format!("task {} is placed {} times", i + 1, placements[i]),
        );
    }

    let mut ys = Vec::with_capacity(n);
    let mut packs = Vec::new();
    let mut tight = true;
    for (b, row) in placed.iter().enumerate() {
        let y = get(&y_name(b));
        if y < -FEASIBILITY_TOL {
            return fail(IlpConstraint::Bounds, format!("{} = {y}", y_name(b)));
        }
        let members: Vec<PackMember> = row
            .iter()
            .enumerate()
            .filter_map(|(task, procs)| procs.map(|procs| PackMember { task, procs }))
            .collect();
        if members.len() > k {
            return fail(
                IlpConstraint::Cardinality,
                format!("pack {} holds {} tasks, limit {k}", b + 1, members.len()),
            );
        }
        let used: usize = members.iter().map(|m| m.procs).sum();
        if used > p {
            return fail(
                IlpConstraint::Capacity,
                format!("pack {} uses {used} processors, limit {p}", b + 1),
            );
        }
        for m in &members {
            let t = workload.time(m.task, m.procs);
            if t > y && !close(t, y) {
                return fail(
                    IlpConstraint::PackCost,
                    format!(
                        "{} = {y} is below t({}, {}) = {t}",
                        y_name(b),
                        m.task + 1,
                        m.procs
                    ),
                );
            }
        }
        ys.push(y);
        if members.is_empty() {
            tight &= close(y, 0.0);
        } else {
            let pack = Pack::new(workload, members);
            tight &= close(y, pack.cost);
            packs.push(pack);
        }
    }

    Ok(IlpVerdict {
        objective: sum_ascending(ys),
        schedule: CoSchedule::new(packs),
        tight,
    })
}
