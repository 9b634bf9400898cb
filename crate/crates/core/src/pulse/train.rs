use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{QocError, Result};

/// Placement of the pulses of several controls within one interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// One control, pulse centered in its interval.
    Centered,
    /// Two controls, both centered; the shorter pulse sits inside the longer.
    Nested,
    /// Controls scaled and shifted into disjoint sub-slots of each interval.
    Interleaved,
}

/// Discretization of the horizon into `intervals` slots of length `tau`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PwmConfig {
    pub tau: f64,
    pub intervals: usize,
    /// Amplitude multiplier `f ≥ 1` applied relative to the EAP amplitude.
    pub scale: f64,
    pub layout: Layout,
}

impl PwmConfig {
    pub fn new(tau: f64, intervals: usize, layout: Layout) -> Result<Self> {
        let cfg = Self {
            tau,
            intervals,
            scale: 1.0,
            layout,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `tau = horizon / intervals`.
    pub fn from_horizon(horizon: f64, intervals: usize, layout: Layout) -> Result<Self> {
        if intervals == 0 {
            return Err(QocError::Config("need at least one interval".into()));
        }
        Self::new(horizon / intervals as f64, intervals, layout)
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        self.scale = scale;
        self.validate()?;
        Ok(self)
    }

    pub fn horizon(&self) -> f64 {
        self.tau * self.intervals as f64
    }

    /// Reference frequency scope `2π M / T` (rad/s).
    pub fn frequency_scope(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.tau
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(QocError::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if self.intervals == 0 {
            return Err(QocError::Config("need at least one interval".into()));
        }
        if !(self.scale >= 1.0 && self.scale.is_finite()) {
            return Err(QocError::Config(format!("scale must be >= 1, got {}", self.scale)));
        }
        Ok(())
    }
}

/// Pulse sequence of one control: amplitude, time offset and signed widths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseControl {
    pub eps: f64,
    #[serde(default)]
    pub shift: f64,
    pub widths: Vec<f64>,
}

impl PulseControl {
    /// Pulse duration `t_p = |w|`.
    pub fn duration(&self, k: usize) -> f64 {
        self.widths[k].abs()
    }

    /// Signed amplitude `g = ±eps`; a zero width takes the positive branch.
    pub fn signed_amplitude(&self, k: usize) -> f64 {
        if self.widths[k] < 0.0 {
            -self.eps
        } else {
            self.eps
        }
    }

    /// `+1` or `−1`, positive at zero.
    pub fn sign(&self, k: usize) -> f64 {
        if self.widths[k] < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Integral area `eps · w` carried by pulse `k`.
    pub fn area(&self, k: usize) -> f64 {
        self.eps * self.widths[k]
    }
}

/// A PWM pulse train: the decision variables of the optimizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrainFile", into = "TrainFile")]
pub struct PwmTrain {
    pub config: PwmConfig,
    pub controls: Vec<PulseControl>,
}

const WIDTH_SLACK: f64 = 1e-12;

impl PwmTrain {
    pub fn new(config: PwmConfig, controls: Vec<PulseControl>) -> Result<Self> {
        let train = Self { config, controls };
        train.validate()?;
        Ok(train)
    }

    /// All-zero widths with amplitude `eps` for each control.
    pub fn zeros(config: PwmConfig, eps: &[f64]) -> Result<Self> {
        let m = eps.len();
        let controls = eps
            .iter()
            .enumerate()
            .map(|(i, &e)| PulseControl {
                eps: e,
                shift: default_shift(config.layout, i, m, config.tau),
                widths: vec![0.0; config.intervals],
            })
            .collect();
        Self::new(config, controls)
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn tau(&self) -> f64 {
        self.config.tau
    }

    pub fn intervals(&self) -> usize {
        self.config.intervals
    }

    pub fn horizon(&self) -> f64 {
        self.config.horizon()
    }

    /// Largest admissible `|w|` for this layout.
    pub fn width_bound(&self) -> f64 {
        match self.config.layout {
            Layout::Interleaved => self.config.tau / self.controls.len() as f64,
            _ => self.config.tau,
        }
    }

    /// Center of pulse `k` (0-based) of control `i`.
    pub fn pulse_center(&self, i: usize, k: usize) -> f64 {
        (k as f64 + 0.5) * self.config.tau + self.controls[i].shift
    }

    /// Time support `[start, end]` of pulse `k` (0-based) of control `i`.
    pub fn pulse_support(&self, i: usize, k: usize) -> (f64, f64) {
        let c = self.pulse_center(i, k);
        let h = 0.5 * self.controls[i].duration(k);
        (c - h, c + h)
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let m = self.controls.len();
        match self.config.layout {
            Layout::Centered if m != 1 => {
                return Err(QocError::Config(format!(
                    "centered layout takes exactly one control, found {m}"
                )))
            }
            Layout::Nested | Layout::Interleaved if m < 2 => {
                return Err(QocError::Config(format!(
                    "{:?} layout needs at least two controls, found {m}",
                    self.config.layout
                )))
            }
            _ => {}
        }
        let bound = self.width_bound();
        let tau = self.config.tau;
        for (i, c) in self.controls.iter().enumerate() {
            if c.widths.len() != self.config.intervals {
                return Err(QocError::DimensionMismatch {
                    expected: self.config.intervals,
                    found: c.widths.len(),
                });
            }
            if !(c.eps > 0.0 && c.eps.is_finite()) {
                return Err(QocError::Config(format!("control {i} amplitude must be positive")));
            }
            if self.config.layout != Layout::Interleaved && c.shift != 0.0 {
                return Err(QocError::Config(format!(
                    "control {i} has a time shift but the layout is {:?}",
                    self.config.layout
                )));
            }
            for (k, w) in c.widths.iter().enumerate() {
                if !w.is_finite() || w.abs() > bound * (1.0 + WIDTH_SLACK) {
                    return Err(QocError::WidthBound {
                        control: i,
                        interval: k,
                        width: *w,
                        bound,
                    });
                }
            }
        }
        if self.config.layout == Layout::Interleaved {
            let slack = WIDTH_SLACK * tau;
            for k in 0..self.config.intervals {
                let lo = k as f64 * tau;
                let hi = lo + tau;
                let mut supports: Vec<(f64, f64)> =
                    (0..m).map(|i| self.pulse_support(i, k)).collect();
                supports.sort_by(|a, b| a.0.total_cmp(&b.0));
                if supports[0].0 < lo - slack || supports[m - 1].1 > hi + slack {
                    return Err(QocError::Overlap { interval: k });
                }
                for pair in supports.windows(2) {
                    if pair[1].0 < pair[0].1 - slack {
                        return Err(QocError::Overlap { interval: k });
                    }
                }
            }
        }
        Ok(())
    }

    /// Widths of all controls concatenated (control-major).
    pub fn flat_widths(&self) -> Vec<f64> {
        self.controls.iter().flat_map(|c| c.widths.iter().copied()).collect()
    }

    /// Replace the widths from a control-major flat vector.
    pub fn set_flat_widths(&mut self, flat: &[f64]) {
        let m = self.config.intervals;
        for (i, c) in self.controls.iter_mut().enumerate() {
            c.widths.copy_from_slice(&flat[i * m..(i + 1) * m]);
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TrainFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TrainFile = serde_json::from_str(text)?;
        file.into_train()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Sub-slot offset of control `i` of `m` relative to the interval center.
pub(crate) fn default_shift(layout: Layout, i: usize, m: usize, tau: f64) -> f64 {
    match layout {
        Layout::Interleaved => (i as f64 + 0.5) * tau / m as f64 - 0.5 * tau,
        _ => 0.0,
    }
}

/// On-disk JSON form of a train.
#[derive(Clone, Serialize, Deserialize)]
struct TrainFile {
    tau: f64,
    #[serde(rename = "M")]
    intervals: usize,
    layout: Layout,
    #[serde(default = "unit_scale")]
    scale: f64,
    controls: Vec<PulseControl>,
}

fn unit_scale() -> f64 {
    1.0
}

impl From<&PwmTrain> for TrainFile {
    fn from(t: &PwmTrain) -> Self {
        TrainFile {
            tau: t.config.tau,
            intervals: t.config.intervals,
            layout: t.config.layout,
            scale: t.config.scale,
            controls: t.controls.clone(),
        }
    }
}

impl From<PwmTrain> for TrainFile {
    fn from(t: PwmTrain) -> Self {
        TrainFile::from(&t)
    }
}

impl TryFrom<TrainFile> for PwmTrain {
    type Error = QocError;

    fn try_from(file: TrainFile) -> Result<Self> {
        file.into_train()
    }
}

impl TrainFile {
    fn into_train(self) -> Result<PwmTrain> {
        let config = PwmConfig {
            tau: self.tau,
            intervals: self.intervals,
            scale: self.scale,
            layout: self.layout,
        };
        PwmTrain::new(config, self.controls)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train(widths: Vec<f64>) -> PwmTrain {
        let cfg = PwmConfig::new(1.0, widths.len(), Layout::Centered).unwrap();
        PwmTrain::new(
            cfg,
            vec![PulseControl {
                eps: 2.0,
                shift: 0.0,
                widths,
            }],
        )
        .unwrap()
    }

    #[test]
    fn derived_views() {
        let t = train(vec![0.5, -0.25, 0.0]);
        let c = &t.controls[0];
        assert_eq!(c.duration(1), 0.25);
        assert_eq!(c.signed_amplitude(1), -2.0);
        assert_eq!(c.signed_amplitude(2), 2.0);
        assert_eq!(t.pulse_support(0, 0), (0.25, 0.75));
        assert_eq!(t.pulse_support(0, 1), (1.375, 1.625));
    }

    #[test]
    fn width_beyond_tau_is_rejected() {
        let cfg = PwmConfig::new(1.0, 1, Layout::Centered).unwrap();
        let r = PwmTrain::new(
            cfg,
            vec![PulseControl {
                eps: 1.0,
                shift: 0.0,
                widths: vec![1.5],
            }],
        );
        assert!(matches!(r, Err(QocError::WidthBound { .. })));
    }

    #[test]
    fn layout_control_count() {
        let cfg = PwmConfig::new(1.0, 1, Layout::Nested).unwrap();
        assert!(PwmTrain::zeros(cfg, &[1.0]).is_err());
        assert!(PwmTrain::zeros(cfg, &[1.0, 1.0]).is_ok());
    }

    #[test]
    fn interleaved_shifts_give_disjoint_slots() {
        let cfg = PwmConfig::new(1.0, 2, Layout::Interleaved).unwrap();
        let mut t = PwmTrain::zeros(cfg, &[1.0, 1.0]).unwrap();
        assert_eq!(t.controls[0].shift, -0.25);
        assert_eq!(t.controls[1].shift, 0.25);
        t.controls[0].widths = vec![0.5, -0.5];
        t.controls[1].widths = vec![0.5, 0.1];
        t.validate().unwrap();
        t.controls[1].widths = vec![0.6, 0.1];
        assert!(t.validate().is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let t = train(vec![0.1 + 0.2, -1.0 / 3.0, 5e-324, 0.999_999_999_999_999_9]);
        let back = PwmTrain::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
        for (a, b) in back.controls[0].widths.iter().zip(&t.controls[0].widths) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
