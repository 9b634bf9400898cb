use crate::error::{QocError, Result};

use super::signal::{ControlSignal, SignalKind};
use super::train::{default_shift, Layout, PulseControl, PwmConfig, PwmTrain};

/// Equal-area PWM transform of one signal: the pulse of interval `k` carries
/// `∫ u dt` over that interval at amplitude `eps` (times `cfg.scale`).
pub fn pwm_transform(u: &ControlSignal, cfg: &PwmConfig, eps: f64) -> Result<PwmTrain> {
    if cfg.layout != Layout::Centered {
        return Err(QocError::Config(
            "a single signal transforms to a centered train; use pwm_transform_many".into(),
        ));
    }
    let control = transform_control(u, cfg, eps)?;
    PwmTrain::new(*cfg, vec![control])
}

/// Transform several signals into one train with the layout of `cfg`.
///
/// For [`Layout::Interleaved`] the nested train is built first and then
/// passed through [`interleave`], so `cfg.scale` must be 1 in that case.
pub fn pwm_transform_many(
    signals: &[ControlSignal],
    cfg: &PwmConfig,
    eps: &[f64],
) -> Result<PwmTrain> {
    if signals.len() != eps.len() {
        return Err(QocError::DimensionMismatch {
            expected: signals.len(),
            found: eps.len(),
        });
    }
    if signals.len() == 1 {
        return pwm_transform(&signals[0], cfg, eps[0]);
    }
    let nested_cfg = PwmConfig {
        layout: Layout::Nested,
        ..*cfg
    };
    let controls = signals
        .iter()
        .zip(eps)
        .map(|(u, &e)| transform_control(u, &nested_cfg, e))
        .collect::<Result<Vec<_>>>()?;
    let train = PwmTrain::new(nested_cfg, controls)?;
    match cfg.layout {
        Layout::Nested => Ok(train),
        Layout::Interleaved => {
            if cfg.scale != 1.0 {
                return Err(QocError::Config(
                    "interleaving sets the scale itself; pass scale = 1".into(),
                ));
            }
            interleave(&train)
        }
        Layout::Centered => Err(QocError::Config(
            "centered layout takes exactly one control".into(),
        )),
    }
}

fn transform_control(u: &ControlSignal, cfg: &PwmConfig, eps: f64) -> Result<PulseControl> {
    cfg.validate()?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(QocError::Config(format!("eps must be positive, got {eps}")));
    }
    let tau = cfg.tau;
    u.ensure_covers(0.0, cfg.horizon())?;
    let limit = eps * tau;
    let mut widths = Vec::with_capacity(cfg.intervals);
    for k in 0..cfg.intervals {
        let area = u.integral(k as f64 * tau, (k + 1) as f64 * tau)?;
        if area.abs() > limit * (1.0 + 1e-12) {
            return Err(QocError::AmplitudeBound {
                interval: k + 1,
                area,
                limit,
            });
        }
        widths.push((area / eps).clamp(-tau, tau) / cfg.scale);
    }
    Ok(PulseControl {
        eps: eps * cfg.scale,
        shift: 0.0,
        widths,
    })
}

/// How [`anti_pwm`] turns interval areas back into a function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AntiPwmShape {
    /// Constant `eps·w/τ` on each interval.
    #[default]
    PiecewiseConstant,
    /// Linear interpolation between interval midpoints (held at the ends).
    Linear,
}

/// Replace each pulse by a constant of equal area over its interval.
pub fn anti_pwm(train: &PwmTrain) -> Result<Vec<ControlSignal>> {
    anti_pwm_with(train, AntiPwmShape::PiecewiseConstant)
}

pub fn anti_pwm_with(train: &PwmTrain, shape: AntiPwmShape) -> Result<Vec<ControlSignal>> {
    if train.config.layout == Layout::Interleaved {
        return Err(QocError::Config(
            "anti-PWM needs centered pulses; the train is interleaved".into(),
        ));
    }
    let tau = train.tau();
    train
        .controls
        .iter()
        .map(|c| {
            let levels: Vec<f64> = (0..train.intervals()).map(|k| c.area(k) / tau).collect();
            let bound = c.eps / train.config.scale;
            let bound = levels.iter().fold(bound, |m, v| m.max(v.abs()));
            match shape {
                AntiPwmShape::PiecewiseConstant => {
                    ControlSignal::piecewise_constant(0.0, tau, levels, bound)
                }
                AntiPwmShape::Linear => {
                    let n = levels.len();
                    let mut values = Vec::with_capacity(2 * n + 1);
                    values.push(levels[0]);
                    for k in 0..n {
                        values.push(levels[k]);
                        let next = if k + 1 < n { levels[k + 1] } else { levels[k] };
                        values.push(0.5 * (levels[k] + next));
                    }
                    values[2 * n] = levels[n - 1];
                    ControlSignal::new(
                        SignalKind::Sampled {
                            t0: 0.0,
                            dt: 0.5 * tau,
                            values,
                        },
                        bound,
                    )
                }
            }
        })
        .collect()
}

/// Gaussian tails are dropped beyond this many pulse widths from the center.
pub const GAUSSIAN_CUTOFF: f64 = 4.0;

/// Replace each rectangle `g·rect(t_p)` by `g·exp(−π (t−c)²/t_p²)`, which has
/// the same area, and sample the sum on `[0, T]` with `samples_per_interval`
/// points per interval.
pub fn gaussian_train(train: &PwmTrain, samples_per_interval: usize) -> Result<Vec<ControlSignal>> {
    if samples_per_interval < 8 {
        return Err(QocError::Config(format!(
            "need at least 8 samples per interval, got {samples_per_interval}"
        )));
    }
    let tau = train.tau();
    let dt = tau / samples_per_interval as f64;
    let n = train.intervals() * samples_per_interval + 1;
    (0..train.num_controls())
        .map(|i| {
            let c = &train.controls[i];
            let mut values = vec![0.0; n];
            for k in 0..train.intervals() {
                let tp = c.duration(k);
                if tp == 0.0 {
                    continue;
                }
                let g = c.signed_amplitude(k);
                let center = train.pulse_center(i, k);
                let reach = GAUSSIAN_CUTOFF * tp;
                let lo = ((center - reach) / dt).floor().max(0.0) as usize;
                let hi = (((center + reach) / dt).ceil() as usize).min(n - 1);
                for (j, v) in values.iter_mut().enumerate().take(hi + 1).skip(lo) {
                    let x = (j as f64 * dt - center) / tp;
                    *v += g * (-std::f64::consts::PI * x * x).exp();
                }
            }
            let bound = values.iter().fold(c.eps, |m, v| m.max(v.abs()));
            ControlSignal::new(
                SignalKind::Sampled {
                    t0: 0.0,
                    dt,
                    values,
                },
                bound,
            )
        })
        .collect()
}

/// Sample the rectangular pulses of control `i`; each sample holds the
/// average of the train over its cell so that areas are preserved.
pub fn rectangular_signal(
    train: &PwmTrain,
    control: usize,
    samples_per_interval: usize,
) -> Result<ControlSignal> {
    if control >= train.num_controls() {
        return Err(QocError::Config(format!("no control {control}")));
    }
    if samples_per_interval == 0 {
        return Err(QocError::Config("need at least one sample per interval".into()));
    }
    let c = &train.controls[control];
    let dt = train.tau() / samples_per_interval as f64;
    let n = train.intervals() * samples_per_interval + 1;
    let mut values = vec![0.0; n];
    for k in 0..train.intervals() {
        let (a, b) = train.pulse_support(control, k);
        if b <= a {
            continue;
        }
        let g = c.signed_amplitude(k);
        let lo = ((a / dt - 0.5).floor().max(0.0)) as usize;
        let hi = ((b / dt + 0.5).ceil() as usize).min(n - 1);
        for (j, v) in values.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let cell_lo = (j as f64 - 0.5) * dt;
            let cell_hi = (j as f64 + 0.5) * dt;
            let overlap = (b.min(cell_hi) - a.max(cell_lo)).max(0.0);
            *v += g * overlap / dt;
        }
    }
    let bound = values.iter().fold(c.eps, |m, v| m.max(v.abs()));
    ControlSignal::new(
        SignalKind::Sampled {
            t0: 0.0,
            dt,
            values,
        },
        bound,
    )
}

/// Raise every amplitude by `f` and shrink every width by `1/f`; the area
/// `eps·w` of each pulse is unchanged and pulses stay centered in their slot.
pub fn scale_train(train: &PwmTrain, f: f64) -> Result<PwmTrain> {
    if !(f >= 1.0 && f.is_finite()) {
        return Err(QocError::Config(format!("scale factor must be >= 1, got {f}")));
    }
    let mut out = train.clone();
    out.config.scale *= f;
    for c in &mut out.controls {
        c.eps *= f;
        for w in &mut c.widths {
            *w /= f;
        }
    }
    out.validate()?;
    Ok(out)
}

/// Undo all accumulated scaling (returns the `scale = 1` view).
pub fn unscale_train(train: &PwmTrain) -> Result<PwmTrain> {
    let f = train.config.scale;
    let mut out = train.clone();
    out.config.scale = 1.0;
    for c in &mut out.controls {
        c.eps /= f;
        for w in &mut c.widths {
            *w *= f;
        }
    }
    if out.config.layout == Layout::Interleaved {
        out.config.layout = Layout::Nested;
        for c in &mut out.controls {
            c.shift = 0.0;
        }
    }
    out.validate()?;
    Ok(out)
}

/// Scale each of the `m` controls by `f = m` and move control `i` into the
/// `i`-th sub-slot of every interval so that no two pulses overlap.
pub fn interleave(train: &PwmTrain) -> Result<PwmTrain> {
    let m = train.num_controls();
    if m < 2 {
        return Err(QocError::Config("interleaving needs at least two controls".into()));
    }
    if train.config.layout == Layout::Interleaved {
        return Err(QocError::Config("train is already interleaved".into()));
    }
    let tau = train.tau();
    let slot = tau / m as f64;
    let f = m as f64;
    let mut out = train.clone();
    out.config.layout = Layout::Interleaved;
    out.config.scale *= f;
    for (i, c) in out.controls.iter_mut().enumerate() {
        c.eps *= f;
        c.shift = default_shift(Layout::Interleaved, i, m, tau);
        for (k, w) in c.widths.iter_mut().enumerate() {
            *w /= f;
            if w.abs() > slot * (1.0 + 1e-12) {
                return Err(QocError::Overlap { interval: k });
            }
        }
    }
    out.validate()?;
    Ok(out)
}
