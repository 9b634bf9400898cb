use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::fixtures::SineDrive;
use crate::error::{QocError, Result};
use crate::pulse::{
    pwm_transform, read_signal_csv, rectangular_signal, signal_spectrum, ControlSignal, Layout, PwmConfig,
    PwmTrain, SpectrumBin,
};
use crate::spin::DEFAULT_EPS;

/// Input and grid of the `transform` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformConfig {
    /// `sine` (50 kHz) or `zero`; ignored when `signal` is set.
    pub preset: String,
    /// `t,u` CSV file.
    pub signal: Option<PathBuf>,
    /// Seconds.
    pub horizon: f64,
    pub intervals: usize,
    /// Pulse amplitude, rad/s.
    pub eps: f64,
    /// Resolution of the rendered train whose spectrum is reported.
    pub samples_per_interval: usize,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            preset: "sine".into(),
            signal: None,
            horizon: 20e-6,
            intervals: 1000,
            eps: DEFAULT_EPS,
            samples_per_interval: 16,
        }
    }
}

impl TransformConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn input(&self) -> Result<ControlSignal> {
        if let Some(p) = &self.signal {
            return read_signal_csv(fs::File::open(p)?, None);
        }
        match self.preset.as_str() {
            "sine" => Ok(SineDrive::new(1).signal()),
            "zero" => Ok(ControlSignal::zero()),
            other => Err(QocError::Config(format!("unknown signal preset '{other}' (sine, zero)"))),
        }
    }
}

/// The PWM train of the configured signal and the spectrum of its
/// rectangular rendering.
pub fn run_transform(cfg: &TransformConfig) -> Result<(PwmTrain, Vec<SpectrumBin>)> {
    if cfg.samples_per_interval == 0 {
        return Err(QocError::Config("samples_per_interval must be positive".into()));
    }
    let grid = PwmConfig::from_horizon(cfg.horizon, cfg.intervals, Layout::Centered)?;
    let train = pwm_transform(&cfg.input()?, &grid, cfg.eps)?;
    let spectrum = signal_spectrum(&rectangular_signal(&train, 0, cfg.samples_per_interval)?)?;
    Ok((train, spectrum))
}
