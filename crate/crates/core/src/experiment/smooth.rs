use serde::{Deserialize, Serialize};

use crate::error::{QocError, Result};
use crate::optimize::{infidelity, ControlProblem};
use crate::propagate::{pwc_propagate, pwm_propagate, SpectralCache};
use crate::pulse::{anti_pwm, gaussian_train, ControlSignal, PwmTrain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothMethod {
    AntiPwm,
    Gaussian,
}

impl std::str::FromStr for SmoothMethod {
    type Err = QocError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anti-pwm" => Ok(SmoothMethod::AntiPwm),
            "gaussian" => Ok(SmoothMethod::Gaussian),
            _ => Err(QocError::Config(format!("unknown smoothing method '{s}' (anti-pwm, gaussian)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothReport {
    pub method: SmoothMethod,
    pub tau: f64,
    /// Infidelity of the rectangular train, propagated exactly.
    pub train_infidelity: f64,
    /// Infidelity of the smooth signal, propagated by PWC with `fine_steps`.
    pub smoothed_infidelity: f64,
    /// `smoothed_infidelity − train_infidelity`.
    pub difference: f64,
    pub fine_steps: usize,
}

/// Convert `train` to smooth controls and compare both against the target.
pub fn smooth_train(
    problem: &ControlProblem,
    train: &PwmTrain,
    method: SmoothMethod,
    samples_per_interval: usize,
) -> Result<(Vec<ControlSignal>, SmoothReport)> {
    if samples_per_interval == 0 {
        return Err(QocError::Config("need at least one sample per interval".into()));
    }
    let dynamics = problem.dynamics();
    let cache = SpectralCache::for_train(&dynamics, train)?;
    let train_if = infidelity(&problem.target, pwm_propagate(&cache, train)?.u.as_ref())?;

    let signals = match method {
        SmoothMethod::AntiPwm => anti_pwm(train)?,
        SmoothMethod::Gaussian => gaussian_train(train, samples_per_interval)?,
    };
    let steps = train.intervals() * samples_per_interval;
    let pairs = dynamics.with_signals(&signals)?;
    let u = pwc_propagate(dynamics.drift(), &pairs, train.horizon() / steps as f64, train.horizon())?.u;
    let smoothed_if = infidelity(&problem.target, u.as_ref())?;
    Ok((
        signals,
        SmoothReport {
            method,
            tau: train.tau(),
            train_infidelity: train_if,
            smoothed_infidelity: smoothed_if,
            difference: smoothed_if - train_if,
            fine_steps: steps,
        },
    ))
}
