//! Synthetic workloads built from an Amdahl-style execution time model with a
//! communication overhead term:
//!
//! ```text
//! t(m, q) = f * t(m, 1) + (1 - f) * t(m, 1) / q + kappa(m, q)
//! ```
//!
//! where `m` is the problem size, `q` the number of cores and `f` the
//! inherently serial fraction.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{io, normalize, LoadMode, Task, Workload};
use crate::error::{Error, Result};

/// Serial fractions used by the bundled presets.
pub const SERIAL_FRACTIONS: [f64; 5] = [0.0, 0.04, 0.08, 0.16, 0.32];

/// Growth of the sequential time `t(m, 1)` with the problem size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SeqForm {
    Linear,
    Nlogn,
    Quadratic,
    Cubic,
}

impl SeqForm {
    pub const ALL: [SeqForm; 4] = [
        SeqForm::Linear,
        SeqForm::Nlogn,
        SeqForm::Quadratic,
        SeqForm::Cubic,
    ];

    /// `t(m, 1) / c`.
    pub fn eval(self, m: f64) -> f64 {
        match self {
            SeqForm::Linear => m,
            SeqForm::Nlogn => m * m.log2(),
            SeqForm::Quadratic => m * m,
            SeqForm::Cubic => m * m * m,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            SeqForm::Linear => "lin",
            SeqForm::Nlogn => "nlogn",
            SeqForm::Quadratic => "quad",
            SeqForm::Cubic => "cubic",
        }
    }
}

/// Synchronization and communication overhead `kappa(m, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum KappaForm {
    /// `log2 q`
    Log2Q,
    /// `(log2 q)^2`
    Log2QSq,
    /// `q log2 q`
    QLog2Q,
    /// `(m / q) log2 q`
    MOverQLog2Q,
    /// `sqrt(m / q)`
    SqrtMOverQ,
    /// `m log2 q`
    MLog2Q,
}

impl KappaForm {
    pub const ALL: [KappaForm; 6] = [
        KappaForm::Log2Q,
        KappaForm::Log2QSq,
        KappaForm::QLog2Q,
        KappaForm::MOverQLog2Q,
        KappaForm::SqrtMOverQ,
        KappaForm::MLog2Q,
    ];

    pub fn eval(self, m: f64, q: f64) -> f64 {
        let lq = q.log2();
        match self {
            KappaForm::Log2Q => lq,
            KappaForm::Log2QSq => lq * lq,
            KappaForm::QLog2Q => q * lq,
            KappaForm::MOverQLog2Q => m / q * lq,
            KappaForm::SqrtMOverQ => (m / q).sqrt(),
            KappaForm::MLog2Q => m * lq,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            KappaForm::Log2Q => "log2q",
            KappaForm::Log2QSq => "log2q_sq",
            KappaForm::QLog2Q => "qlog2q",
            KappaForm::MOverQLog2Q => "m_over_q_log2q",
            KappaForm::SqrtMOverQ => "sqrt_m_over_q",
            KappaForm::MLog2Q => "mlog2q",
        }
    }
}

impl fmt::Display for SeqForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl fmt::Display for KappaForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTaskSpec {
    /// Problem size.
    pub m: u64,
    /// Scaling constant of the sequential time.
    pub c: f64,
    pub seq_form: SeqForm,
    /// Serial fraction in `[0, 1]`.
    pub f: f64,
    pub kappa_form: KappaForm,
}

impl SyntheticTaskSpec {
    /// Sequential time `t(m, 1) = c * g(m)`.
    pub fn sequential_time(&self) -> f64 {
        self.c * self.seq_form.eval(self.m as f64)
    }

    /// Model execution time on `cores` cores.
    pub fn time_on_cores(&self, cores: usize) -> f64 {
        let q = cores as f64;
        let m = self.m as f64;
        let t1 = self.sequential_time();
        self.f * t1 + (1.0 - self.f) * t1 / q + self.kappa_form.eval(m, q)
    }

    fn check(&self) -> Result<()> {
        if self.m == 0 || !(self.c.is_finite() && self.c > 0.0) || !(0.0..=1.0).contains(&self.f) {
            return Err(Error::InvalidWorkload(format!(
                "synthetic spec out of range: m={}, c={}, f={}",
                self.m, self.c, self.f
            )));
        }
        Ok(())
    }

    fn label(&self, index: usize) -> String {
        format!(
            "s{index:03}-{}-f{}-{}-m{}",
            self.seq_form, self.f, self.kappa_form, self.m
        )
    }
}

/// Builds a workload on `p` slots of `cores_per_slot` cores each. Slot count
/// `j` maps to `q = j * cores_per_slot` cores; each profile is normalized.
pub fn generate_synthetic(
    specs: &[SyntheticTaskSpec],
    p: usize,
    cores_per_slot: usize,
) -> Result<Workload> {
    if p == 0 || cores_per_slot == 0 {
        return Err(Error::InvalidWorkload(
            "p and cores_per_slot must be at least 1".into(),
        ));
    }
    let tasks = specs
        .iter()
        .enumerate()
        .map(|(index, spec)| {
            spec.check()?;
            let raw: Vec<f64> = (1..=p)
                .map(|j| spec.time_on_cores(j * cores_per_slot))
                .collect();
            Ok(Task::new(spec.label(index), normalize(&raw)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Workload::with_cores_per_slot(p, cores_per_slot, tasks)
}

/// One-slot times of the presets lie in `[SLOT_TIME_MIN, 2 * SLOT_TIME_MIN]`
/// seconds. Problem sizes come from a geometric ladder and `c` is set so
/// that `t(m, 8)` lands on the target time.
const SLOT_TIME_MIN: f64 = 1000.0;
const M_LADDER: [u64; 7] = [1 << 6, 1 << 7, 1 << 8, 1 << 9, 1 << 10, 1 << 11, 1 << 12];

/// The `index`-th preset spec. `index` walks the 120 combinations of
/// sequential form, serial fraction and overhead form as a mixed-radix
/// counter (sequential form fastest, overhead form slowest), so any prefix
/// of the sequence is spread over all forms.
///
/// Target times mix a golden-ratio sequence with the serial fraction rank:
/// long jobs tend to have small serial fractions, as larger problems
/// usually scale better.
fn preset_spec(index: usize) -> SyntheticTaskSpec {
    let seq_form = SeqForm::ALL[index % 4];
    let f_rank = (index / 4) % 5;
    let f = SERIAL_FRACTIONS[f_rank];
    let kappa_form = KappaForm::ALL[(index / 20) % 6];
    let m = M_LADDER[index % M_LADDER.len()];

    let golden = (index as f64 * 0.618_033_988_749_895).fract();
    let position = (1.0 - f_rank as f64 / 4.0 + golden) / 2.0;
    let target = SLOT_TIME_MIN * position.exp2();
    let q = super::DEFAULT_CORES_PER_SLOT as f64;
    let compute = (target - kappa_form.eval(m as f64, q)).max(0.1 * target);
    let c = compute / (seq_form.eval(m as f64) * (f + (1.0 - f) / q));
    SyntheticTaskSpec {
        m,
        c,
        seq_form,
        f,
        kappa_form,
    }
}

/// 65 specs, meant for `p = 16` slots of 8 cores.
pub fn workload_ii_preset() -> Vec<SyntheticTaskSpec> {
    (0..65).map(preset_spec).collect()
}

/// 260 specs, meant for `p = 32` slots of 8 cores.
pub fn workload_iii_preset() -> Vec<SyntheticTaskSpec> {
    (0..260).map(preset_spec).collect()
}

const FIXTURE_I: &str = include_str!("../../fixtures/workload_i.json");

/// Bundled 10-task workload on 16 slots of 8 cores with hand-made profiles
/// shaped like production scientific codes.
pub fn fixture_i() -> Workload {
    io::from_json_str(FIXTURE_I, LoadMode::Strict)
        .expect("bundled fixture is valid")
        .workload
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::validate;

    #[test]
    fn linear_log2q_profile() {
        let spec = SyntheticTaskSpec {
            m: 1024,
            c: 1.0,
            seq_form: SeqForm::Linear,
            f: 0.0,
            kappa_form: KappaForm::Log2Q,
        };
        let w = generate_synthetic(&[spec], 2, 1).unwrap();
        assert_eq!(w.task(0).profile.times(), &[1024.0, 513.0]);
    }

    #[test]
    fn fully_serial_task_is_flat() {
        let spec = SyntheticTaskSpec {
            m: 4096,
            c: 0.5,
            seq_form: SeqForm::Nlogn,
            f: 1.0,
            kappa_form: KappaForm::Log2Q,
        };
        let w = generate_synthetic(&[spec], 4, 8).unwrap();
        let t1 = w.time(0, 1);
        // overhead only grows with q, so the clamp pins every column to t(1)
        assert!(w.task(0).profile.times().iter().all(|&t| t == t1));
        assert_eq!(t1, spec.time_on_cores(8));
    }

    #[test]
    fn presets_have_expected_shape() {
        let ii = workload_ii_preset();
        let iii = workload_iii_preset();
        assert_eq!(ii.len(), 65);
        assert_eq!(iii.len(), 260);
        for spec in ii.iter().chain(&iii) {
            assert!(SERIAL_FRACTIONS.contains(&spec.f));
            assert!(spec.c > 0.0);
        }
        let w = generate_synthetic(&ii, 16, 8).unwrap();
        assert_eq!((w.n(), w.p()), (65, 16));
        assert!(validate(&w).is_empty());
        let w = generate_synthetic(&iii, 32, 8).unwrap();
        assert_eq!((w.n(), w.p()), (260, 32));
        assert!(validate(&w).is_empty());
    }

    #[test]
    fn generation_is_deterministic() {
        let specs = workload_ii_preset();
        assert_eq!(
            generate_synthetic(&specs, 16, 8).unwrap(),
            generate_synthetic(&specs, 16, 8).unwrap()
        );
    }

    #[test]
    fn fixture_i_loads() {
        let w = fixture_i();
        assert_eq!((w.n(), w.p(), w.cores_per_slot()), (10, 16, 8));
        assert!(validate(&w).is_empty());
    }

    #[test]
    fn out_of_range_spec_is_rejected() {
        let spec = SyntheticTaskSpec {
            m: 16,
            c: 1.0,
            seq_form: SeqForm::Linear,
            f: 1.5,
            kappa_form: KappaForm::Log2Q,
        };
        assert!(generate_synthetic(&[spec], 2, 8).is_err());
    }
}
