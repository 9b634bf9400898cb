//! Named experiments, the propagation benchmark and pulse smoothing, as run
//! by the `qoc` binary.

mod bench;
mod fixtures;
mod smooth;
mod transform;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use bench::{read_bench_csv, run_bench, write_bench_csv, BenchCell, BenchGrid, Scheme, ACCURACY_NOTE};
pub use fixtures::SineDrive;
pub use smooth::{smooth_train, SmoothMethod, SmoothReport};
pub use transform::{run_transform, TransformConfig};

use crate::error::{QocError, Result};
use crate::optimize::{multi_start, ControlProblem, OptimizationReport, OptimizerConfig, Status};
use crate::pulse::Layout;
use crate::spin::{load_spin_table, make_target, Axis, GateKind, DEFAULT_EPS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    ThreeQubitRotation,
    SixQubitCnot,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::ThreeQubitRotation, Preset::SixQubitCnot, Preset::Custom];

    pub fn name(self) -> &'static str {
        match self {
            Preset::ThreeQubitRotation => "three-qubit-rotation",
            Preset::SixQubitCnot => "six-qubit-cnot",
            Preset::Custom => "custom",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = QocError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| QocError::Config(format!("unknown preset '{s}' (known: three-qubit-rotation, six-qubit-cnot, custom)")))
    }
}

/// Everything needed to run one optimization experiment.
///
/// In JSON, every field except `experiment` may be omitted; missing fields
/// take the values of the named experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Preset,
    /// Built-in dataset name or path to a spin-table CSV.
    pub spins: String,
    /// Use only the first `n` spins of the table.
    pub num_spins: Option<usize>,
    pub target: GateKind,
    /// Seconds.
    pub horizon: f64,
    pub intervals: usize,
    pub layout: Layout,
    pub axes: Vec<Axis>,
    /// Amplitude bound, rad/s.
    pub eps: f64,
    pub starts: usize,
    /// Worker threads for the starts; results do not depend on it.
    pub parallelism: usize,
    pub optimizer: OptimizerConfig,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(p: Preset) -> Self {
        let base = Self {
            experiment: p,
            spins: "d-norleucine".into(),
            num_spins: Some(3),
            target: GateKind::Rotation {
                axis: Axis::X,
                angle: std::f64::consts::FRAC_PI_2,
                spin: 1,
            },
            horizon: 10e-3,
            intervals: 2000,
            layout: Layout::Centered,
            axes: vec![Axis::X],
            eps: DEFAULT_EPS,
            starts: 10,
            parallelism: 1,
            optimizer: OptimizerConfig {
                max_iterations: 500,
                target_infidelity: 1e-3,
                ..Default::default()
            },
            out: None,
        };
        match p {
            Preset::ThreeQubitRotation => base,
            Preset::SixQubitCnot => Self {
                num_spins: Some(6),
                target: GateKind::Cnot { control: 1, target: 2 },
                horizon: 50e-3,
                intervals: 5000,
                layout: Layout::Nested,
                axes: vec![Axis::X, Axis::Y],
                starts: 3,
                optimizer: OptimizerConfig {
                    max_iterations: 50,
                    target_infidelity: 1e-2,
                    ..Default::default()
                },
                ..base
            },
            // single spin, short horizon: small enough to solve to high accuracy
            Preset::Custom => Self {
                num_spins: Some(1),
                horizon: 10e-6,
                intervals: 20,
                starts: 1,
                optimizer: OptimizerConfig {
                    max_iterations: 200,
                    target_infidelity: 1e-6,
                    ..Default::default()
                },
                ..base
            },
        }
    }

    /// The named experiment at full size: M = 10⁵ and,
    /// for the CNOT, T = 10 s. Custom experiments are returned unchanged.
    pub fn full_scale(mut self) -> Self {
        match self.experiment {
            Preset::ThreeQubitRotation => {
                self.intervals = 100_000;
                self.horizon = 10e-3;
            }
            Preset::SixQubitCnot => {
                self.intervals = 100_000;
                self.horizon = 10.0;
            }
            Preset::Custom => {}
        }
        self
    }

    /// Parse JSON, filling absent fields from the named experiment
    /// (`custom` when `experiment` is absent).
    pub fn from_json(text: &str) -> Result<Self> {
        let user: Value = serde_json::from_str(text)?;
        let Value::Object(fields) = &user else {
            return Err(QocError::Config("experiment config must be a JSON object".into()));
        };
        let preset = match fields.get("experiment") {
            None => Preset::Custom,
            Some(Value::String(s)) => s.parse()?,
            Some(other) => return Err(QocError::Config(format!("experiment must be a string, got {other}"))),
        };
        let mut merged = serde_json::to_value(Self::preset(preset))?;
        merge(&mut merged, user);
        let cfg: Self = serde_json::from_value(merged)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(QocError::Config("starts must be positive".into()));
        }
        if self.parallelism == 0 {
            return Err(QocError::Config("parallelism must be positive".into()));
        }
        self.optimizer.validate()?;
        self.problem().map(|_| ())
    }

    pub fn problem(&self) -> Result<ControlProblem> {
        let mut system = load_spin_table(&self.spins, self.eps)?;
        if let Some(n) = self.num_spins {
            system = system.subsystem(n)?;
        }
        let target = make_target(self.target, system.num_spins())?;
        ControlProblem::new(system, target, self.horizon, self.intervals, self.axes.clone(), self.layout)
    }
}

/// Overwrite `base` with `over`, descending into objects present in both.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    // a target is replaced whole: its variants have different fields
                    Some(slot) if k != "target" => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// One line per start in [`ExperimentSummary`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub status: Status,
    pub iterations: usize,
    pub final_infidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment: Preset,
    pub target_infidelity: f64,
    pub starts: usize,
    /// Starts that reached the target.
    pub converged: usize,
    pub best_seed: u64,
    pub best_infidelity: f64,
    /// Ordered by final infidelity.
    pub runs: Vec<RunSummary>,
}

/// Multi-start optimization of the configured problem.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(ExperimentSummary, Vec<OptimizationReport>)> {
    cfg.validate()?;
    let problem = cfg.problem()?;
    let reports = multi_start(&problem, &cfg.optimizer, cfg.starts, cfg.parallelism)?;
    let runs: Vec<RunSummary> = reports
        .iter()
        .map(|r| RunSummary {
            seed: r.seed,
            status: r.status,
            iterations: r.iterations,
            final_infidelity: r.final_infidelity(),
        })
        .collect();
    let summary = ExperimentSummary {
        experiment: cfg.experiment,
        target_infidelity: cfg.optimizer.target_infidelity,
        starts: cfg.starts,
        converged: reports.iter().filter(|r| r.status == Status::Converged).count(),
        best_seed: runs[0].seed,
        best_infidelity: runs[0].final_infidelity,
        runs,
    };
    Ok((summary, reports))
}

/// `summary.json`, plus `run-<seed>.json`, `trace-<seed>.csv` for every
/// start and `best_train.json`.
pub fn write_experiment(dir: &Path, summary: &ExperimentSummary, reports: &[OptimizationReport]) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(summary)?)?;
    for r in reports {
        fs::write(dir.join(format!("run-{}.json", r.seed)), r.to_json()?)?;
        r.write_trace_csv(fs::File::create(dir.join(format!("trace-{}.csv", r.seed)))?)?;
    }
    if let Some(t) = reports.first().and_then(|r| r.final_train.as_ref()) {
        t.save(&dir.join("best_train.json"))?;
    }
    Ok(())
}
