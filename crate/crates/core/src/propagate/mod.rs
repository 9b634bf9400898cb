//! Propagators `U(T, 0)` for piecewise-constant, split-operator, and PWM
//! controls, and gradients of the gate infidelity.

mod cache;
mod pwc;
mod pwm;
mod spectral;
mod spo;

pub use cache::{SignKey, SpectralCache};
pub use pwc::{grape_gradient, magnus4_propagate, pwc_propagate, pwc_propagate_amplitudes, GrapeGradient};
pub use pwm::{
    pwm_gradient, pwm_gradient_1, pwm_gradient_2, pwm_gradient_interleaved, pwm_gradient_staged,
    pwm_propagate, pwm_propagate_1, pwm_propagate_2, pwm_propagate_interleaved,
    pwm_propagate_staged, PwmGradient,
};
pub use spectral::{eigendecompose, eigendecompose_named, expm_spectral, SpectralDecomposition};
pub use spo::{interval_means, spo_propagate, spo_propagate_means};

use crate::error::{QocError, Result};
use crate::linalg::{CMat, HermitianOperator};
use crate::pulse::ControlSignal;
use crate::spin::{build_drift, unit_control, Axis, SpinSystem};

/// `H(t) = H0 + Σ_i u_i(t) H_i` with each `H_i` at unit amplitude.
#[derive(Clone, Debug)]
pub struct Dynamics {
    drift: HermitianOperator,
    controls: Vec<HermitianOperator>,
}

impl Dynamics {
    pub fn new(drift: HermitianOperator, controls: Vec<HermitianOperator>) -> Result<Self> {
        for c in &controls {
            if c.dim() != drift.dim() {
                return Err(QocError::DimensionMismatch {
                    expected: drift.dim(),
                    found: c.dim(),
                });
            }
        }
        Ok(Self { drift, controls })
    }

    /// Drift of `sys` with collective unit controls `−Σ S_axis` on `axes`.
    pub fn from_system(sys: &SpinSystem, axes: &[Axis]) -> Self {
        let m = sys.num_spins();
        Self {
            drift: build_drift(sys),
            controls: axes.iter().map(|&a| unit_control(m, a)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    pub fn drift(&self) -> &HermitianOperator {
        &self.drift
    }

    pub fn controls(&self) -> &[HermitianOperator] {
        &self.controls
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    /// Pair each control operator with a signal.
    pub fn with_signals<'a>(
        &'a self,
        signals: &'a [ControlSignal],
    ) -> Result<Vec<(&'a ControlSignal, &'a HermitianOperator)>> {
        if signals.len() != self.controls.len() {
            return Err(QocError::DimensionMismatch {
                expected: self.controls.len(),
                found: signals.len(),
            });
        }
        Ok(signals.iter().zip(&self.controls).collect())
    }
}

/// Forward states kept from a propagation so a gradient pass can restart
/// from them instead of from `t = 0`.
#[derive(Clone, Debug)]
pub struct StageCache {
    /// State at the start of every `stride`-th interval.
    pub(crate) checkpoints: Vec<CMat>,
}

impl StageCache {
    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct PropagationResult {
    pub u: CMat,
    pub stage_cache: Option<StageCache>,
    /// Intervals between stored checkpoints (0 when nothing was stored).
    pub stride: usize,
}

impl PropagationResult {
    pub(crate) fn plain(u: CMat) -> Self {
        Self {
            u,
            stage_cache: None,
            stride: 0,
        }
    }
}

/// How much forward state a gradient pass may hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMemory {
    /// Store every intermediate state (one block).
    Full,
    /// Checkpoint every `n` intervals.
    Stride(usize),
    /// Checkpoint every `⌈√M⌉` intervals; fail if that needs more bytes.
    Budget(usize),
}

impl Default for GradientMemory {
    fn default() -> Self {
        GradientMemory::Budget(1 << 30)
    }
}

impl GradientMemory {
    pub fn from_megabytes(mb: usize) -> Self {
        GradientMemory::Budget(mb.saturating_mul(1 << 20))
    }

    /// Checkpoint stride for `intervals` steps given the bytes one interval
    /// of block storage and one checkpoint need.
    pub(crate) fn stride(
        &self,
        intervals: usize,
        per_interval: usize,
        per_checkpoint: usize,
    ) -> Result<usize> {
        let intervals = intervals.max(1);
        match *self {
            GradientMemory::Full => Ok(intervals),
            GradientMemory::Stride(s) => Ok(s.clamp(1, intervals)),
            GradientMemory::Budget(budget) => {
                let s = ((intervals as f64).sqrt().ceil() as usize).clamp(1, intervals);
                let needed = s * per_interval + intervals.div_ceil(s) * per_checkpoint;
                if needed > budget {
                    return Err(QocError::MemoryBudget { needed, budget });
                }
                Ok(s)
            }
        }
    }
}

pub(crate) fn matrix_bytes(dim: usize) -> usize {
    dim * dim * 16
}
