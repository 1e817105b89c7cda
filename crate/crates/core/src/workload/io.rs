use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{normalize, profile_violations, SpeedupProfile, Task, Violation, Workload};
use crate::error::{Error, Result};

/// How profiles that break the speedup model are treated on load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Reject the file with [`Error::Validation`].
    #[default]
    Strict,
    /// Normalize offending profiles and report what was changed.
    Lax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub workload: Workload,
    /// Violations found in the file; non-empty only in lax mode, where the
    /// corresponding profiles were normalized.
    pub warnings: Vec<Violation>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWorkload {
    p: usize,
    #[serde(default = "default_cores_per_slot")]
    cores_per_slot: usize,
    tasks: Vec<RawTask>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    id: String,
    times: Vec<f64>,
}

fn default_cores_per_slot() -> usize {
    super::DEFAULT_CORES_PER_SLOT
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Parse { line, context, .. } => Error::Parse {
            path: Some(path.to_owned()),
            line,
            context,
        },
        other => other,
    }
}

/// Reads a workload from its JSON representation.
pub fn load(path: impl AsRef<Path>, mode: LoadMode) -> Result<Loaded> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    from_json_str(&text, mode).map_err(|e| with_path(e, path))
}

pub(crate) fn from_json_str(text: &str, mode: LoadMode) -> Result<Loaded> {
    let raw: RawWorkload = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: None,
        line: Some(e.line()),
        context: e.to_string(),
    })?;
    let rows = raw.tasks.into_iter().map(|t| (t.id, t.times)).collect();
    build(raw.p, raw.cores_per_slot, rows, mode)
}

/// Reads a profile matrix with header `id,t1,...,tp`; `p` is the number of
/// time columns.
pub fn load_csv(path: impl AsRef<Path>, cores_per_slot: usize, mode: LoadMode) -> Result<Loaded> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(e, path))?;

    let header = reader.headers().map_err(|e| csv_error(e, path))?.clone();
    if header.get(0) != Some("id") {
        return Err(with_path(
            Error::parse("first CSV column must be `id`"),
            path,
        ));
    }
    for (j, name) in header.iter().enumerate().skip(1) {
        if name != format!("t{j}") {
            return Err(with_path(
                Error::parse(format!("column {} should be `t{j}`, found `{name}`", j + 1)),
                path,
            ));
        }
    }
    let p = header.len() - 1;

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e, path))?;
        let line = record.position().map(|pos| pos.line() as usize);
        let id = record.get(0).unwrap_or_default().to_owned();
        let times = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(j, field)| {
                field.parse::<f64>().map_err(|_| Error::Parse {
                    path: Some(path.to_owned()),
                    line,
                    context: format!("task {id:?}: field t{} is not a number: {field:?}", j + 1),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((id, times));
    }
    build(p, cores_per_slot, rows, mode).map_err(|e| with_path(e, path))
}

fn csv_error(err: csv::Error, path: &Path) -> Error {
    Error::Parse {
        path: Some(path.to_owned()),
        line: err.position().map(|pos| pos.line() as usize),
        context: err.to_string(),
    }
}

fn build(
    p: usize,
    cores_per_slot: usize,
    rows: Vec<(String, Vec<f64>)>,
    mode: LoadMode,
) -> Result<Loaded> {
    if p == 0 {
        return Err(Error::parse("field `p` must be at least 1"));
    }
    let mut tasks = Vec::with_capacity(rows.len());
    let mut warnings = Vec::new();
    for (index, (id, times)) in rows.into_iter().enumerate() {
        if times.len() != p {
            return Err(Error::parse(format!(
                "task {id:?}: `times` has {} entries, expected p={p}",
                times.len()
            )));
        }
        let profile = SpeedupProfile::new(times)
            .map_err(|e| Error::parse(format!("task {id:?}: `times`: {e}")))?;
        let violations = profile_violations(&id, index, &profile);
        let profile = if violations.is_empty() {
            profile
        } else {
            warnings.extend(violations);
            normalize(profile.times())?
        };
        tasks.push(Task::new(id, profile));
    }
    if mode == LoadMode::Strict && !warnings.is_empty() {
        return Err(Error::Validation(warnings));
    }
    let workload = Workload::with_cores_per_slot(p, cores_per_slot, tasks)
        .map_err(|e| Error::parse(e.to_string()))?;
    Ok(Loaded { workload, warnings })
}

pub(crate) fn to_json_string(workload: &Workload) -> String {
    serde_json::to_string_pretty(workload).expect("workload serializes")
}

/// Writes a workload as JSON.
pub fn save(workload: &Workload, path: impl AsRef<Path>) -> Result<()> {
    let mut text = to_json_string(workload);
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::ViolationKind;

    #[test]
    fn save_then_load_round_trips() {
        let w = Workload::from_times(
            3,
            vec![vec![10.0, 6.0, 5.0], vec![8.0, 5.0, 1.0 / 3.0 * 12.5]],
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.json");
        save(&w, &path).unwrap();
        let loaded = load(&path, LoadMode::Strict).unwrap();
        assert_eq!(loaded.workload, w);
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn wrong_profile_length_is_a_parse_error() {
        let text = r#"{"p": 3, "tasks": [{"id": "a", "times": [3, 2]}]}"#;
        let err = from_json_str(text, LoadMode::Strict).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
        assert!(err.to_string().contains("expected p=3"));
    }

    #[test]
    fn malformed_json_reports_line() {
        let text = "{\n \"p\": 2,\n \"tasks\": [ {\"id\": \"a\", \"times\": [1, oops]} ]\n}";
        match from_json_str(text, LoadMode::Strict).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, Some(3)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn strict_rejects_and_lax_normalizes() {
        let text = r#"{"p": 2, "cores_per_slot": 8, "tasks": [{"id": "a", "times": [10, 12]}]}"#;
        match from_json_str(text, LoadMode::Strict).unwrap_err() {
            Error::Validation(v) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].kind, ViolationKind::IncreasingTime);
            }
            other => panic!("unexpected {other}"),
        }
        let lax = from_json_str(text, LoadMode::Lax).unwrap();
        assert_eq!(lax.warnings.len(), 1);
        assert_eq!(lax.workload.task(0).profile.times(), &[10.0, 10.0]);
    }

    #[test]
    fn csv_import() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        fs::write(&path, "id,t1,t2,t3\nalpha,9,5,4\nbeta,4,2.5,2\n").unwrap();
        let loaded = load_csv(&path, 8, LoadMode::Strict).unwrap();
        assert_eq!(loaded.workload.p(), 3);
        assert_eq!(loaded.workload.task(1).id, "beta");
        assert_eq!(loaded.workload.time(1, 2), 2.5);

        fs::write(&path, "id,t1,t2\nalpha,9,x\n").unwrap();
        match load_csv(&path, 8, LoadMode::Strict).unwrap_err() {
            Error::Parse { line, context, .. } => {
                assert_eq!(line, Some(2));
                assert!(context.contains("t2"));
            }
            other => panic!("unexpected {other}"),
        }
    }
}
