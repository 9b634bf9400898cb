//! PWM transform of a 50 kHz sine, checked against its antiderivative.

use std::f64::consts::PI;

use pwm_qoc::pulse::{pwm_transform, rectangular_signal, signal_spectrum, ControlSignal, Layout, PwmConfig};
use pwm_qoc::spin::DEFAULT_EPS;

fn main() -> pwm_qoc::Result<()> {
    let (amp, w) = (2.0 * PI * 50e3, 2.0 * PI * 50e3);
    let u = ControlSignal::sine(amp, w, 0.0);
    let cfg = PwmConfig::from_horizon(20e-6, 100, Layout::Centered)?;
    let train = pwm_transform(&u, &cfg, DEFAULT_EPS)?;

    let mut worst: f64 = 0.0;
    for k in 0..cfg.intervals {
        let (a, b) = (k as f64 * cfg.tau, (k + 1) as f64 * cfg.tau);
        let exact = amp / w * ((w * a).cos() - (w * b).cos());
        worst = worst.max((train.controls[0].area(k) - exact).abs());
    }
    println!("tau = {:.2e} s, width bound = {:.2e} s", cfg.tau, train.width_bound());
    println!("first widths: {:?}", &train.controls[0].widths[..5]);
    println!("worst area error: {worst:.2e} (eps*tau = {:.2e})", DEFAULT_EPS * cfg.tau);

    // below the pulse rate, the rendered train still carries the drive
    let rendered = rectangular_signal(&train, 0, 32)?;
    let spectrum = signal_spectrum(&rendered)?;
    let pulse_rate = 1.0 / cfg.tau;
    let peak = spectrum[1..]
        .iter()
        .filter(|b| b.frequency < 0.5 * pulse_rate)
        .max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
        .unwrap();
    println!(
        "strongest component below {:.1} MHz: {:.1} kHz",
        0.5 * pulse_rate / 1e6,
        peak.frequency / 1e3
    );
    Ok(())
}
