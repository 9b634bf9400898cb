use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::propagate::Dynamics;
use crate::pulse::ControlSignal;
use crate::spin::{Axis, SpinSystem};

/// `u(t) = A sin(2π f t)` on the x axis of the leading spins of D-Norleucine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineDrive {
    pub num_spins: usize,
    /// rad/s.
    pub amplitude: f64,
    /// Hz.
    pub frequency: f64,
}

impl SineDrive {
    /// 50 kHz drive with a 50 kHz (×2π) amplitude.
    pub fn new(num_spins: usize) -> Self {
        Self {
            num_spins,
            amplitude: 2.0 * PI * 50e3,
            frequency: 50e3,
        }
    }

    pub fn signal(&self) -> ControlSignal {
        ControlSignal::sine(self.amplitude, 2.0 * PI * self.frequency, 0.0)
    }

    pub fn system(&self) -> Result<SpinSystem> {
        SpinSystem::d_norleucine().subsystem(self.num_spins)
    }

    pub fn dynamics(&self) -> Result<Dynamics> {
        Ok(Dynamics::from_system(&self.system()?, &[Axis::X]))
    }
}
