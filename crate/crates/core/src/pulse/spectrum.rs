use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{QocError, Result};

use super::signal::{ControlSignal, SignalKind};

/// One bin of a magnitude spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumBin {
    /// Hz.
    pub frequency: f64,
    /// `|Σ u_n e^{−2πi kn/N}|·dt`, an approximation of `|∫ u e^{−2πi f t} dt|`.
    pub magnitude: f64,
}

/// One-sided DFT magnitude spectrum of a sampled signal.
pub fn signal_spectrum(u: &ControlSignal) -> Result<Vec<SpectrumBin>> {
    let (dt, values) = match u.kind() {
        SignalKind::Sampled { dt, values, .. } => (*dt, values),
        _ => {
            return Err(QocError::InvalidSignal(
                "spectrum needs a sampled signal; call sample() first".into(),
            ))
        }
    };
    let n = values.len();
    if n < 2 {
        return Err(QocError::InvalidSignal("need at least 2 samples".into()));
    }
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * dt);
    Ok(buf[..=n / 2]
        .iter()
        .enumerate()
        .map(|(k, z)| SpectrumBin {
            frequency: k as f64 * df,
            magnitude: z.norm() * dt,
        })
        .collect())
}

/// Write `frequency_hz,magnitude` rows with a header.
pub fn write_spectrum_csv<W: Write>(bins: &[SpectrumBin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["frequency_hz", "magnitude"])?;
    for b in bins {
        w.write_record([format!("{:?}", b.frequency), format!("{:?}", b.magnitude)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pure_sine_has_single_dominant_bin() {
        let f0 = 50.0e3;
        let dt = 1.0 / (64.0 * f0);
        let n = 64 * 20;
        let u = ControlSignal::sine(1.0, 2.0 * PI * f0, 0.0).sample(0.0, dt, n).unwrap();
        let s = signal_spectrum(&u).unwrap();
        let peak = s.iter().max_by(|a, b| a.magnitude.total_cmp(&b.magnitude)).unwrap();
        assert!((peak.frequency - f0).abs() < 1e-6 * f0);
        let second = s
            .iter()
            .filter(|b| (b.frequency - f0).abs() > 1.0)
            .fold(0.0f64, |m, b| m.max(b.magnitude));
        assert!(second < 1e-9 * peak.magnitude);
    }

    #[test]
    fn zero_signal_has_zero_spectrum() {
        let u = ControlSignal::sampled(0.0, 1.0, vec![0.0; 16]).unwrap();
        assert!(signal_spectrum(&u).unwrap().iter().all(|b| b.magnitude == 0.0));
    }

    #[test]
    fn analytic_signal_must_be_sampled_first() {
        assert!(signal_spectrum(&ControlSignal::constant(1.0)).is_err());
    }
}
