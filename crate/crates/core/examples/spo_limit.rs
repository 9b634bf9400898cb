//! Amplitude-scaled PWM approaches the split-operator propagator as the
//! scale factor grows.

use pwm_qoc::experiment::SineDrive;
use pwm_qoc::linalg::distance;
use pwm_qoc::propagate::{eigendecompose, pwm_propagate, spo_propagate, SpectralCache};
use pwm_qoc::pulse::{pwm_transform, scale_train, Layout, PwmConfig};

fn main() -> pwm_qoc::Result<()> {
    let drive = SineDrive::new(2);
    let d = drive.dynamics()?;
    let u = drive.signal();
    let cfg = PwmConfig::from_horizon(20e-6, 512, Layout::Centered)?;
    let spo = spo_propagate(&eigendecompose(d.drift())?, &[(&u, &d.controls()[0])], cfg.tau, cfg.horizon())?.u;
    let train = pwm_transform(&u, &cfg, drive.amplitude)?;
    for f in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        let scaled = scale_train(&train, f)?;
        let cache = SpectralCache::for_train(&d, &scaled)?;
        let pwm = pwm_propagate(&cache, &scaled)?.u;
        println!("f = {f:>4}: ||U_pwm - U_spo|| = {:.3e}", distance(pwm.as_ref(), spo.as_ref()));
    }
    Ok(())
}
