use std::path::PathBuf;

use thiserror::Error;

use crate::exact::IlpConstraint;
use crate::pack::Infeasibility;
use crate::workload::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("profile is empty")]
    EmptyProfile,

    #[error("duration at index {index} is not a positive finite number: {value}")]
    NonPositiveEntry { index: usize, value: f64 },

    #[error("invalid workload: {0}")]
    InvalidWorkload(String),

    #[error("{}", parse_message(.path, .line, .context))]
    Parse {
        path: Option<PathBuf>,
        line: Option<usize>,
        context: String,
    },

    #[error("workload violates the speedup model at {} point(s)", .0.len())]
    Validation(Vec<Violation>),

    #[error("pack has no tasks")]
    EmptyPack,

    #[error("{tasks} tasks cannot share a pack of {p} processors")]
    TooManyTasks { tasks: usize, p: usize },

    #[error("pack size k={k} must lie in 1..={p}")]
    InvalidPackSize { k: usize, p: usize },

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(Infeasibility),

    #[error("search space of {count} exceeds the configured budget of {cap}")]
    BudgetExceeded { count: u128, cap: u128 },

    #[error("assignment violates constraint {constraint}: {detail}")]
    InfeasibleAssignment {
        constraint: IlpConstraint,
        detail: String,
    },

    #[error("invalid heuristic specification: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_message(path: &Option<PathBuf>, line: &Option<usize>, context: &str) -> String {
    let mut msg = String::from("parse error");
    if let Some(path) = path {
        msg.push_str(&format!(" in {}", path.display()));
    }
    if let Some(line) = line {
        msg.push_str(&format!(" at line {line}"));
    }
    msg.push_str(": ");
    msg.push_str(context);
    msg
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line: None,
            context: context.into(),
        }
    }
}
