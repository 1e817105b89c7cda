use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use copack::exact::export_ilp;
use copack::experiment::{run_sweep, solve, ExperimentConfig, Solver, DEFAULT_K_VALUES};
use copack::heuristics::{HeuristicKind, HeuristicSpec};
use copack::metrics::{metrics, MetricsReport};
use copack::pack::ScheduleDoc;
use copack::workload::{
    fixture_i, generate_synthetic, load, save, workload_ii_preset, workload_iii_preset, LoadMode,
    DEFAULT_CORES_PER_SLOT,
};
use copack::{Error, Workload};
use serde::Serialize;

/// Co-scheduling of moldable tasks in packs: solvers and benchmark sweeps.
#[derive(Debug, Parser)]
#[command(name = "copack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a workload file against the speedup model.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// Write a bundled workload as JSON.
    Generate {
        #[arg(value_enum)]
        preset: Preset,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one workload for one pack size and print the schedule.
    Solve {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        k: usize,
        /// Heuristic such as `pack-approx` or `random-proc-9`, or one of
        /// `exhaustive`, `exact-k2`.
        #[arg(long)]
        heuristic: String,
        #[command(flatten)]
        tuning: Tuning,
        /// Write the JSON here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every solver at every pack size; writes report.csv and report.json.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Pack sizes; defaults to 2,4,...,16 up to p.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        /// Solvers; defaults to the seven standard heuristics.
        #[arg(long, value_delimiter = ',')]
        heuristic: Vec<String>,
        #[command(flatten)]
        tuning: Tuning,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the integer program of a workload in LP format.
    ExportIlp {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Source {
    /// Workload JSON file, or a preset name (workload-ii, workload-iii, fixture-i).
    #[arg(long)]
    workload: String,
    /// Reject profiles that break the speedup model (default).
    #[arg(long, conflicts_with = "lax")]
    strict: bool,
    /// Repair such profiles and warn instead.
    #[arg(long)]
    lax: bool,
}

#[derive(Debug, Args)]
struct Tuning {
    #[arg(long, env = "COPACK_SEED", default_value_t = 0)]
    seed: u64,
    /// Run count of a random or Pack-by-Pack heuristic.
    #[arg(long)]
    runs: Option<usize>,
    /// Explicit Pack-by-Pack epsilons.
    #[arg(long, value_delimiter = ',')]
    eps_list: Vec<f64>,
    /// Partition budget of the exhaustive solver.
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    WorkloadIi,
    WorkloadIii,
    FixtureI,
}

impl Preset {
    fn build(self) -> copack::Result<Workload> {
        match self {
            Preset::WorkloadIi => {
                generate_synthetic(&workload_ii_preset(), 16, DEFAULT_CORES_PER_SLOT)
            }
            Preset::WorkloadIii => {
                generate_synthetic(&workload_iii_preset(), 32, DEFAULT_CORES_PER_SLOT)
            }
            Preset::FixtureI => Ok(fixture_i()),
        }
    }
}

impl Source {
    fn mode(&self) -> LoadMode {
        if self.lax {
            LoadMode::Lax
        } else {
            LoadMode::Strict
        }
    }

    /// Loads the workload and returns it with a label for reports.
    fn load(&self) -> anyhow::Result<(Workload, String)> {
        let path = Path::new(&self.workload);
        if !path.exists() {
            if let Ok(preset) = Preset::from_str(&self.workload, true) {
                return Ok((preset.build()?, self.workload.clone()));
            }
        }
        let loaded =
            load(path, self.mode()).with_context(|| format!("loading {}", path.display()))?;
        for warning in &loaded.warnings {
            eprintln!("warning: repaired {warning}");
        }
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.workload.clone());
        Ok((loaded.workload, label))
    }
}

impl Tuning {
    fn solver(&self, name: &str) -> anyhow::Result<Solver> {
        let solver: Solver = name.parse()?;
        Ok(match solver {
            Solver::Heuristic(spec) => Solver::Heuristic(self.tune(spec)?),
            Solver::Exhaustive { budget } => Solver::Exhaustive {
                budget: self.budget.unwrap_or(budget),
            },
            other => other,
        }
        .with_seed(self.seed))
    }

    fn tune(&self, mut spec: HeuristicSpec) -> anyhow::Result<HeuristicSpec> {
        if let Some(runs) = self.runs {
            spec = HeuristicSpec::new(spec.kind, runs, spec.seed);
        }
        if !self.eps_list.is_empty() {
            if spec.kind != HeuristicKind::PackByPack {
                bail!(Error::InvalidSpec(
                    "--eps-list only applies to pack-by-pack".into()
                ));
            }
            spec.epsilons = self.eps_list.clone();
            spec.runs = spec.epsilons.len();
        }
        spec.check()?;
        Ok(spec)
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    workload: &'a str,
    heuristic: String,
    k: usize,
    seed: u64,
    schedule: ScheduleDoc,
    metrics: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    run_costs: Vec<f64>,
}

fn cmd_validate(source: &Source) -> anyhow::Result<()> {
    let (workload, _) = source.load()?;
    println!(
        "ok: {} tasks, p={}, {} cores per slot",
        workload.n(),
        workload.p(),
        workload.cores_per_slot()
    );
    Ok(())
}

fn cmd_generate(preset: Preset, out: &Path) -> anyhow::Result<()> {
    let workload = preset.build()?;
    save(&workload, out)?;
    println!(
        "wrote {} tasks, p={} to {}",
        workload.n(),
        workload.p(),
        out.display()
    );
    Ok(())
}

fn cmd_solve(
    source: &Source,
    k: usize,
    name: &str,
    tuning: &Tuning,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let (workload, label) = source.load()?;
    let solver = tuning.solver(name)?;
    let solved = solve(&workload, k, &solver)?;
    let output = SolveOutput {
        workload: &label,
        heuristic: solver.name(),
        k,
        seed: tuning.seed,
        schedule: solved.schedule.to_doc(&workload),
        metrics: metrics(&workload, &solved.schedule)?,
        epsilon: solved.epsilon,
        run_costs: solved.run_costs,
    };
    let json = serde_json::to_string_pretty(&output)?;
    match out {
        Some(path) => fs::write(path, json + "\n")?,
        None => writeln!(io::stdout().lock(), "{json}")?,
    }
    Ok(())
}

fn cmd_sweep(
    source: &Source,
    k_values: &[usize],
    names: &[String],
    tuning: &Tuning,
    out: &Path,
) -> anyhow::Result<()> {
    let (workload, label) = source.load()?;
    let k_values = if k_values.is_empty() {
        DEFAULT_K_VALUES
            .into_iter()
            .filter(|&k| k <= workload.p())
            .collect()
    } else {
        k_values.to_vec()
    };
    let solvers = if names.is_empty() {
        Solver::standard_set(tuning.seed)
    } else {
        names
            .iter()
            .map(|name| tuning.solver(name))
            .collect::<anyhow::Result<_>>()?
    };
    let config = ExperimentConfig {
        workload_id: label,
        k_values,
        solvers,
        seed: tuning.seed,
    };
    let report = run_sweep(&workload, &config)?;

    fs::create_dir_all(out)?;
    let csv_path = out.join("report.csv");
    let json_path = out.join("report.json");
    report.write_csv(BufWriter::new(File::create(&csv_path)?))?;
    report.write_json(BufWriter::new(File::create(&json_path)?))?;

    let mut stdout = io::stdout().lock();
    writeln!(
        stdout,
        "{:<16} {:>3} {:>9} {:>8} {:>9} {:>9}",
        "heuristic", "k", "rel_cost", "packing", "rel_resp", "ms"
    )?;
    for row in &report.rows {
        match (row.rel_cost, row.packing_ratio, row.rel_response) {
            (Some(c), Some(p), Some(r)) => writeln!(
                stdout,
                "{:<16} {:>3} {c:>9.4} {p:>8.4} {r:>9.4} {:>9.3}",
                row.heuristic, row.k, row.ms
            )?,
            _ => writeln!(
                stdout,
                "{:<16} {:>3} failed: {}",
                row.heuristic,
                row.k,
                row.error.as_deref().unwrap_or("unknown error")
            )?,
        }
    }
    writeln!(
        stdout,
        "wrote {} and {}",
        csv_path.display(),
        json_path.display()
    )?;
    Ok(())
}

fn cmd_export_ilp(source: &Source, k: usize, out: &Path) -> anyhow::Result<()> {
    let (workload, _) = source.load()?;
    let model =
        export_ilp(&workload, k, out).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "wrote {} binaries, {} continuous, {} constraints to {}",
        model.binaries(),
        model.continuous(),
        model.constraints(),
        out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Validate { source } => cmd_validate(source),
        Command::Generate { preset, out } => cmd_generate(*preset, out),
        Command::Solve {
            source,
            k,
            heuristic,
            tuning,
            out,
        } => cmd_solve(source, *k, heuristic, tuning, out.as_deref()),
        Command::Sweep {
            source,
            k,
            heuristic,
            tuning,
            out,
        } => cmd_sweep(source, k, heuristic, tuning, out),
        Command::ExportIlp { source, k, out } => cmd_export_ilp(source, *k, out),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Io(_) => 2,
                Error::BudgetExceeded { .. } => 3,
                _ => 1,
            };
        }
        if cause.is::<io::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if let Some(Error::Validation(violations)) = err.downcast_ref::<Error>() {
                for v in violations {
                    eprintln!("  {v}");
                }
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
