use serde::{Deserialize, Serialize};

use crate::error::{QocError, Result};

/// Closed-form control waveforms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "waveform", rename_all = "lowercase")]
pub enum Waveform {
    Constant {
        value: f64,
    },
    /// `amplitude · sin(angular_frequency · t + phase)`
    Sine {
        amplitude: f64,
        angular_frequency: f64,
        phase: f64,
    },
}

impl Waveform {
    fn value(&self, t: f64) -> f64 {
        match *self {
            Waveform::Constant { value } => value,
            Waveform::Sine {
                amplitude,
                angular_frequency,
                phase,
            } => amplitude * (angular_frequency * t + phase).sin(),
        }
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        match *self {
            Waveform::Constant { value } => value * (b - a),
            Waveform::Sine {
                amplitude,
                angular_frequency: w,
                phase,
            } => {
                if w == 0.0 {
                    amplitude * phase.sin() * (b - a)
                } else {
                    amplitude / w * ((w * a + phase).cos() - (w * b + phase).cos())
                }
            }
        }
    }

    fn peak(&self) -> f64 {
        match *self {
            Waveform::Constant { value } => value.abs(),
            Waveform::Sine { amplitude, .. } => amplitude.abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SignalKind {
    Analytic(Waveform),
    /// Uniform samples starting at `t0`, linearly interpolated.
    Sampled { t0: f64, dt: f64, values: Vec<f64> },
    /// Constant `levels[k]` on `[t0 + k·step, t0 + (k+1)·step)`.
    PiecewiseConstant { t0: f64, step: f64, levels: Vec<f64> },
}

/// A bounded real control function `u(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    kind: SignalKind,
    bound: f64,
}

const SLACK: f64 = 1e-12;

impl ControlSignal {
    pub fn new(kind: SignalKind, bound: f64) -> Result<Self> {
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(QocError::InvalidSignal(format!("bound must be finite and non-negative, got {bound}")));
        }
        let limit = bound * (1.0 + SLACK) + SLACK;
        let check = |values: &[f64]| -> Result<()> {
            for (i, v) in values.iter().enumerate() {
                if !v.is_finite() || v.abs() > limit {
                    return Err(QocError::InvalidSignal(format!(
                        "sample {i} = {v} outside [-{bound}, {bound}]"
                    )));
                }
            }
            Ok(())
        };
        match &kind {
            SignalKind::Analytic(w) => {
                if w.peak() > limit {
                    return Err(QocError::InvalidSignal(format!(
                        "waveform peak {} exceeds bound {bound}",
                        w.peak()
                    )));
                }
            }
            SignalKind::Sampled { dt, values, .. } => {
                if !(*dt > 0.0) {
                    return Err(QocError::InvalidSignal("dt must be positive".into()));
                }
                if values.len() < 2 {
                    return Err(QocError::InvalidSignal("need at least 2 samples".into()));
                }
                check(values)?;
            }
            SignalKind::PiecewiseConstant { step, levels, .. } => {
                if !(*step > 0.0) {
                    return Err(QocError::InvalidSignal("step must be positive".into()));
                }
                if levels.is_empty() {
                    return Err(QocError::InvalidSignal("need at least 1 level".into()));
                }
                check(levels)?;
            }
        }
        Ok(Self { kind, bound })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            kind: SignalKind::Analytic(Waveform::Constant { value }),
            bound: value.abs(),
        }
    }

    pub fn sine(amplitude: f64, angular_frequency: f64, phase: f64) -> Self {
        Self {
            kind: SignalKind::Analytic(Waveform::Sine {
                amplitude,
                angular_frequency,
                phase,
            }),
            bound: amplitude.abs(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Samples with the bound set to their peak magnitude.
    pub fn sampled(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        let bound = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self::new(SignalKind::Sampled { t0, dt, values }, bound)
    }

    pub fn piecewise_constant(t0: f64, step: f64, levels: Vec<f64>, bound: f64) -> Result<Self> {
        Self::new(SignalKind::PiecewiseConstant { t0, step, levels }, bound)
    }

    pub fn kind(&self) -> &SignalKind {
        &self.kind
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Replace the bound (must still dominate the signal).
    pub fn with_bound(self, bound: f64) -> Result<Self> {
        Self::new(self.kind, bound)
    }

    /// Interval on which the signal is defined.
    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            SignalKind::Analytic(_) => (f64::NEG_INFINITY, f64::INFINITY),
            SignalKind::Sampled { t0, dt, values } => (*t0, t0 + dt * (values.len() - 1) as f64),
            SignalKind::PiecewiseConstant { t0, step, levels } => {
                (*t0, t0 + step * levels.len() as f64)
            }
        }
    }

    pub fn ensure_covers(&self, from: f64, to: f64) -> Result<()> {
        let (start, end) = self.domain();
        let tol = 1e-9 * (to - from).abs().max(f64::MIN_POSITIVE);
        if start > from + tol || end < to - tol {
            return Err(QocError::SignalDomain {
                start,
                end,
                from,
                to,
            });
        }
        Ok(())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match &self.kind {
            SignalKind::Analytic(w) => w.value(t),
            SignalKind::Sampled { t0, dt, values } => {
                let x = ((t - t0) / dt).clamp(0.0, (values.len() - 1) as f64);
                let i = (x.floor() as usize).min(values.len() - 2);
                let frac = x - i as f64;
                values[i] * (1.0 - frac) + values[i + 1] * frac
            }
            SignalKind::PiecewiseConstant { t0, step, levels } => {
                let k = ((t - t0) / step).floor().clamp(0.0, (levels.len() - 1) as f64);
                levels[k as usize]
            }
        }
    }

    /// `∫_a^b u(t) dt`: closed form for analytic and piecewise-constant
    /// signals, trapezoidal rule on the native grid for sampled signals (both
    /// limits must fall on grid points).
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        match &self.kind {
            SignalKind::Analytic(w) => Ok(w.integral(a, b)),
            SignalKind::Sampled { t0, dt, values } => {
                self.ensure_covers(a, b)?;
                let ia = grid_index(a, *t0, *dt)?;
                let ib = grid_index(b, *t0, *dt)?;
                let ia = ia.min(values.len() - 1);
                let ib = ib.min(values.len() - 1);
                let mut s = 0.0;
                for i in ia..ib {
                    s += 0.5 * (values[i] + values[i + 1]);
                }
                Ok(s * dt)
            }
            SignalKind::PiecewiseConstant { t0, step, levels } => {
                self.ensure_covers(a, b)?;
                let mut s = 0.0;
                for (k, level) in levels.iter().enumerate() {
                    let lo = (t0 + step * k as f64).max(a);
                    let hi = (t0 + step * (k + 1) as f64).min(b);
                    if hi > lo {
                        s += level * (hi - lo);
                    }
                }
                Ok(s)
            }
        }
    }

    /// Uniform samples `u(t0 + i·dt)`, `i < n`.
    pub fn sample(&self, t0: f64, dt: f64, n: usize) -> Result<ControlSignal> {
        let values = (0..n).map(|i| self.value_at(t0 + dt * i as f64)).collect();
        ControlSignal::new(SignalKind::Sampled { t0, dt, values }, self.bound)
    }
}

fn grid_index(t: f64, t0: f64, dt: f64) -> Result<usize> {
    let x = (t - t0) / dt;
    let r = x.round();
    if (x - r).abs() > 1e-9 * r.abs().max(1.0) || r < 0.0 {
        return Err(QocError::InvalidSignal(format!(
            "time {t} is not on the sample grid (t0 = {t0}, dt = {dt})"
        )));
    }
    Ok(r as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_needs_two_points_and_positive_dt() {
        assert!(ControlSignal::sampled(0.0, 0.1, vec![1.0]).is_err());
        assert!(ControlSignal::sampled(0.0, 0.0, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn samples_outside_bound_are_rejected() {
        let kind = SignalKind::Sampled {
            t0: 0.0,
            dt: 1.0,
            values: vec![0.0, 2.0],
        };
        assert!(ControlSignal::new(kind, 1.0).is_err());
    }

    #[test]
    fn trapezoid_on_grid() {
        let u = ControlSignal::sampled(0.0, 0.5, vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(u.integral(0.0, 2.0).unwrap(), 4.0);
        assert_eq!(u.integral(0.5, 1.5).unwrap(), 2.0);
        assert!(u.integral(0.2, 1.0).is_err());
        assert!(u.integral(0.0, 3.0).is_err());
    }

    #[test]
    fn sine_integral_closed_form() {
        let u = ControlSignal::sine(2.0, 3.0, 0.0);
        let got = u.integral(0.0, 1.0).unwrap();
        assert!((got - 2.0 / 3.0 * (1.0 - 3.0f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn piecewise_constant_integral_and_value() {
        let u = ControlSignal::piecewise_constant(0.0, 1.0, vec![1.0, -2.0, 3.0], 3.0).unwrap();
        assert_eq!(u.integral(0.0, 3.0).unwrap(), 2.0);
        assert_eq!(u.integral(0.5, 1.5).unwrap(), -0.5);
        assert_eq!(u.value_at(1.5), -2.0);
        assert_eq!(u.value_at(3.0), 3.0);
    }

    #[test]
    fn linear_interpolation() {
        let u = ControlSignal::sampled(1.0, 1.0, vec![0.0, 2.0]).unwrap();
        assert_eq!(u.value_at(1.5), 1.0);
        assert_eq!(u.value_at(0.0), 0.0);
        assert_eq!(u.value_at(9.0), 2.0);
    }
}
