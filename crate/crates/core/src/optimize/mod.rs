//! Gate-infidelity minimization over PWM widths, and a GRAPE baseline.

mod descent;
mod problem;
mod runs;

use faer::MatRef;
use serde::{Deserialize, Serialize};

pub use problem::ControlProblem;
pub use runs::{multi_start, optimize_grape, optimize_pwm, GrapeInit, PwmInit};

use crate::error::{QocError, Result};
use crate::linalg::{c64, trace, TargetGate};
use crate::pulse::PwmTrain;

/// `IF = 1 − Re tr(W†U) / N`, phase-sensitive.
pub fn infidelity(target: &TargetGate, u: MatRef<'_, c64>) -> Result<f64> {
    let w = target.matrix();
    if u.nrows() != w.nrows() || u.ncols() != w.ncols() {
        return Err(QocError::DimensionMismatch {
            expected: w.nrows(),
            found: u.nrows(),
        });
    }
    let overlap = trace(crate::linalg::mul(w.adjoint(), u).as_ref());
    Ok(1.0 - overlap.re / w.nrows() as f64)
}

/// Phase-insensitive variant `1 − |tr(W†U)| / N`.
pub fn infidelity_abs(target: &TargetGate, u: MatRef<'_, c64>) -> Result<f64> {
    let w = target.matrix();
    if u.nrows() != w.nrows() {
        return Err(QocError::DimensionMismatch {
            expected: w.nrows(),
            found: u.nrows(),
        });
    }
    let overlap = trace(crate::linalg::mul(w.adjoint(), u).as_ref());
    Ok(1.0 - overlap.norm() / w.nrows() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    pub target_infidelity: f64,
    /// Minimize `1 − |tr(W†U)|/N` instead, ignoring the global phase.
    pub phase_insensitive: bool,
    pub direction: Direction,
    /// First trial step; `None` scales it so the largest variable moves by
    /// a tenth of its bound.
    pub initial_step: Option<f64>,
    pub armijo_shrink: f64,
    pub armijo_slope: f64,
    pub max_backtracks: usize,
    /// Step doublings tried after an immediately accepted first trial.
    pub max_expansions: usize,
    pub stall_window: usize,
    /// Relative improvement over the window below which the gradient is
    /// perturbed.
    pub stall_tolerance: f64,
    /// Perturbation norm relative to the gradient norm.
    pub perturbation_scale: f64,
    /// Stop without moving when the gradient norm is below this.
    pub gradient_tolerance: f64,
    pub seed: u64,
    pub memory_budget_mb: usize,
    /// Print one line per iteration to stderr.
    pub verbose: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            target_infidelity: 1e-3,
            phase_insensitive: false,
            direction: Direction::ConjugateGradient,
            initial_step: None,
            armijo_shrink: 0.5,
            armijo_slope: 1e-4,
            max_backtracks: 40,
            max_expansions: 8,
            stall_window: 10,
            stall_tolerance: 1e-6,
            perturbation_scale: 0.1,
            gradient_tolerance: 1e-14,
            seed: 0,
            memory_budget_mb: 1024,
            verbose: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(QocError::Config(format!("optimizer: {what}")));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.target_infidelity >= 0.0) {
            return bad("target_infidelity must be non-negative");
        }
        if let Some(s) = self.initial_step {
            if !(s > 0.0 && s.is_finite()) {
                return bad("initial_step must be positive");
            }
        }
        if !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            return bad("armijo_shrink must lie in (0, 1)");
        }
        if !(self.armijo_slope > 0.0 && self.armijo_slope < 1.0) {
            return bad("armijo_slope must lie in (0, 1)");
        }
        if self.max_backtracks == 0 || self.stall_window == 0 {
            return bad("max_backtracks and stall_window must be positive");
        }
        if !(self.stall_tolerance > 0.0 && self.perturbation_scale > 0.0) {
            return bad("stall_tolerance and perturbation_scale must be positive");
        }
        if !(self.gradient_tolerance >= 0.0) {
            return bad("gradient_tolerance must be non-negative");
        }
        if self.memory_budget_mb == 0 {
            return bad("memory_budget_mb must be positive");
        }
        Ok(())
    }

    pub(crate) fn memory(&self) -> crate::propagate::GradientMemory {
        crate::propagate::GradientMemory::from_megabytes(self.memory_budget_mb)
    }
}

/// How the search direction is formed from successive gradients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `−∇IF`.
    Steepest,
    /// Polak–Ribière (clipped at zero) conjugate gradients, restarted
    /// whenever the direction fails to descend or after a perturbation.
    ConjugateGradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    IterationLimit,
    Stalled,
    /// The run raised an error; see `error` in the report.
    Failed,
}

/// Piecewise-constant control amplitudes (rad/s), `amplitudes[i][k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PwcField {
    pub tau: f64,
    pub bound: f64,
    pub amplitudes: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizationReport {
    pub status: Status,
    pub seed: u64,
    /// Iterations performed (`trace.len() − 1`).
    pub iterations: usize,
    /// Infidelity at the start and after every iteration.
    pub trace: Vec<f64>,
    /// Wall-clock time of every iteration, ms.
    pub wall_ms: Vec<f64>,
    /// Whether the step of each iteration used a perturbed gradient.
    pub perturbed: Vec<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub final_train: Option<PwmTrain>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub final_field: Option<PwcField>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl OptimizationReport {
    pub fn final_infidelity(&self) -> f64 {
        self.trace.last().copied().unwrap_or(f64::INFINITY)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// `iteration,infidelity,wall_ms,perturbed` rows.
    pub fn write_trace_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "infidelity", "wall_ms", "perturbed"])?;
        for (i, f) in self.trace.iter().enumerate() {
            let (ms, p) = if i == 0 {
                (0.0, false)
            } else {
                (self.wall_ms[i - 1], self.perturbed[i - 1])
            };
            w.write_record([i.to_string(), format!("{f:?}"), format!("{ms:?}"), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub(crate) fn failed(seed: u64, err: &QocError) -> Self {
        Self {
            status: Status::Failed,
            seed,
            iterations: 0,
            trace: Vec::new(),
            wall_ms: Vec::new(),
            perturbed: Vec::new(),
            final_train: None,
            final_field: None,
            error: Some(err.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    #[test]
    fn infidelity_examples() {
        let w = TargetGate::new(identity(2)).unwrap();
        assert_eq!(infidelity(&w, identity(2).as_ref()).unwrap(), 0.0);
        let minus = identity(2) * faer::Scale(c64::new(-1.0, 0.0));
        assert_eq!(infidelity(&w, minus.as_ref()).unwrap(), 2.0);
        let phi = 0.7;
        let rot = identity(2) * faer::Scale(c64::cis(phi));
        assert!((infidelity(&w, rot.as_ref()).unwrap() - (1.0 - phi.cos())).abs() < 1e-15);
        assert!(infidelity_abs(&w, rot.as_ref()).unwrap().abs() < 1e-15);
        assert!(infidelity(&w, identity(4).as_ref()).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        let bad = OptimizerConfig {
            armijo_shrink: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
