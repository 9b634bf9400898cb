//! Turn a pulse train back into smooth controls: anti-PWM (piecewise
//! constant or linear) and Gaussian pulses.

use std::f64::consts::PI;

use pwm_qoc::pulse::{anti_pwm_with, gaussian_train, pwm_transform, AntiPwmShape, ControlSignal, Layout, PwmConfig};

fn main() -> pwm_qoc::Result<()> {
    let eps = 2.0 * PI * 2e6;
    let u = ControlSignal::sine(0.5 * eps, 2.0 * PI * 25e3, 0.0);
    let cfg = PwmConfig::from_horizon(40e-6, 40, Layout::Centered)?;
    let train = pwm_transform(&u, &cfg, eps)?;

    let flat = anti_pwm_with(&train, AntiPwmShape::PiecewiseConstant)?;
    let linear = anti_pwm_with(&train, AntiPwmShape::Linear)?;
    let gauss = gaussian_train(&train, 16)?;

    // values at interval midpoints, and the Gaussian's mean over the interval
    // (its peak is the full pulse amplitude)
    println!("{:>8} {:>12} {:>12} {:>12} {:>14}", "t (us)", "original", "anti-pwm", "linear", "gaussian mean");
    for k in (0..cfg.intervals).step_by(4) {
        let (a, b) = (k as f64 * cfg.tau, (k + 1) as f64 * cfg.tau);
        let t = 0.5 * (a + b);
        println!(
            "{:>8.2} {:>12.4e} {:>12.4e} {:>12.4e} {:>14.4e}",
            t * 1e6,
            u.value_at(t),
            flat[0].value_at(t),
            linear[0].value_at(t),
            gauss[0].integral(a, b)? / cfg.tau
        );
    }
    let area = |s: &ControlSignal| s.integral(0.0, cfg.horizon() / 2.0).unwrap();
    println!(
        "area of the first half: original {:.6e}, anti-pwm {:.6e}, gaussian {:.6e}",
        area(&u),
        area(&flat[0]),
        area(&gauss[0])
    );
    Ok(())
}
