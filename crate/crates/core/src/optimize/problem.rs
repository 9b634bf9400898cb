use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{QocError, Result};
use crate::linalg::TargetGate;
use crate::propagate::Dynamics;
use crate::pulse::{Layout, PwmConfig, PwmTrain};
use crate::spin::{Axis, SpinSystem};

/// What to steer, toward which gate, over which horizon and grid.
#[derive(Clone, Debug)]
pub struct ControlProblem {
    pub system: SpinSystem,
    pub target: TargetGate,
    /// Seconds.
    pub horizon: f64,
    pub intervals: usize,
    pub axes: Vec<Axis>,
    pub layout: Layout,
    /// Amplitude bound of every control, rad/s.
    pub eps: f64,
}

impl ControlProblem {
    pub fn new(
        system: SpinSystem,
        target: TargetGate,
        horizon: f64,
        intervals: usize,
        axes: Vec<Axis>,
        layout: Layout,
    ) -> Result<Self> {
        let eps = system.eps();
        let p = Self {
            system,
            target,
            horizon,
            intervals,
            axes,
            layout,
            eps,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.target.dim() != self.system.dim() {
            return Err(QocError::DimensionMismatch {
                expected: self.system.dim(),
                found: self.target.dim(),
            });
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(QocError::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.intervals == 0 {
            return Err(QocError::Config("need at least one interval".into()));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(QocError::Config(format!("eps must be positive, got {}", self.eps)));
        }
        match (self.axes.len(), self.layout) {
            (0, _) => Err(QocError::Config("need at least one control axis".into())),
            (1, Layout::Centered) => Ok(()),
            (1, l) => Err(QocError::Config(format!("{l:?} layout needs two or more axes"))),
            (_, Layout::Centered) => Err(QocError::Config("centered layout takes one axis".into())),
            _ => Ok(()),
        }
    }

    pub fn tau(&self) -> f64 {
        self.horizon / self.intervals as f64
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    pub fn dynamics(&self) -> Dynamics {
        Dynamics::from_system(&self.system, &self.axes)
    }

    /// PWM grid; interleaved trains carry the sub-slot scale factor.
    pub fn pwm_config(&self) -> Result<PwmConfig> {
        let cfg = PwmConfig::from_horizon(self.horizon, self.intervals, self.layout)?;
        match self.layout {
            Layout::Interleaved => cfg.with_scale(self.axes.len() as f64),
            _ => Ok(cfg),
        }
    }

    pub fn zero_train(&self) -> Result<PwmTrain> {
        let cfg = self.pwm_config()?;
        let eps = vec![self.eps * cfg.scale; self.axes.len()];
        PwmTrain::zeros(cfg, &eps)
    }

    /// Largest admissible |width|.
    pub fn width_bound(&self) -> Result<f64> {
        Ok(self.zero_train()?.width_bound())
    }

    /// Widths uniform in `[−b/2, b/2]` with `b` the width bound.
    pub fn random_train(&self, rng: &mut ChaCha8Rng) -> Result<PwmTrain> {
        let mut t = self.zero_train()?;
        let half = 0.5 * t.width_bound();
        for c in &mut t.controls {
            for w in &mut c.widths {
                *w = rng.random_range(-half..=half);
            }
        }
        Ok(t)
    }

    /// Amplitudes uniform in `[−eps/2, eps/2]`.
    pub fn random_field(&self, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
        let half = 0.5 * self.eps;
        (0..self.axes.len())
            .map(|_| (0..self.intervals).map(|_| rng.random_range(-half..=half)).collect())
            .collect()
    }
}
