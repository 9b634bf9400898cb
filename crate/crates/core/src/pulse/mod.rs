//! Control signals, PWM pulse trains, and the transforms between them.

mod signal;
mod spectrum;
mod train;
mod transform;

use std::io::{Read, Write};

pub use signal::{ControlSignal, SignalKind, Waveform};
pub use spectrum::{signal_spectrum, write_spectrum_csv, SpectrumBin};
pub use train::{Layout, PulseControl, PwmConfig, PwmTrain};
pub use transform::{
    anti_pwm, anti_pwm_with, gaussian_train, interleave, pwm_transform, pwm_transform_many,
    rectangular_signal, scale_train, unscale_train, AntiPwmShape, GAUSSIAN_CUTOFF,
};

use crate::error::{QocError, Result};

/// Write a sampled signal as `t,u` CSV (seconds, rad/s). Non-sampled
/// signals are sampled at `fallback_dt` over `[0, horizon]` first.
pub fn write_signal_csv<W: Write>(
    u: &ControlSignal,
    out: W,
    fallback_dt: f64,
    horizon: f64,
) -> Result<()> {
    let owned;
    let (t0, dt, values) = match u.kind() {
        SignalKind::Sampled { t0, dt, values } => (*t0, *dt, values),
        _ => {
            let n = (horizon / fallback_dt).round() as usize + 1;
            owned = u.sample(0.0, fallback_dt, n)?;
            match owned.kind() {
                SignalKind::Sampled { t0, dt, values } => (*t0, *dt, values),
                _ => unreachable!(),
            }
        }
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "u"])?;
    for (i, v) in values.iter().enumerate() {
        let t = t0 + dt * i as f64;
        w.write_record([format!("{t:?}"), format!("{v:?}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a `t,u` CSV into a sampled signal. Times must be uniformly spaced.
pub fn read_signal_csv<R: Read>(input: R, bound: Option<f64>) -> Result<ControlSignal> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "u" {
        return Err(QocError::Parse {
            row: 0,
            column: 1,
            message: "expected header `t,u`".into(),
        });
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        if rec.len() != 2 {
            return Err(QocError::Parse {
                row,
                column: rec.len(),
                message: "expected 2 columns".into(),
            });
        }
        let parse = |c: usize| -> Result<f64> {
            rec[c].parse().map_err(|_| QocError::Parse {
                row,
                column: c + 1,
                message: format!("not a number: {:?}", &rec[c]),
            })
        };
        times.push(parse(0)?);
        values.push(parse(1)?);
    }
    if times.len() < 2 {
        return Err(QocError::InvalidSignal("need at least 2 samples".into()));
    }
    let t0 = times[0];
    let dt = (times[times.len() - 1] - t0) / (times.len() - 1) as f64;
    for (i, t) in times.iter().enumerate() {
        let expected = t0 + dt * i as f64;
        if (t - expected).abs() > 1e-9 * dt {
            return Err(QocError::Parse {
                row: i + 2,
                column: 1,
                message: "sample times are not uniformly spaced".into(),
            });
        }
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ControlSignal::new(
        SignalKind::Sampled { t0, dt, values },
        bound.unwrap_or(peak),
    )
}
