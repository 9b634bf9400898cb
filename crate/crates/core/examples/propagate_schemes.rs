//! Propagate one sine-driven system with every scheme and compare each to a
//! converged fourth-order Magnus reference.

use std::time::Instant;

use pwm_qoc::experiment::SineDrive;
use pwm_qoc::linalg::distance;
use pwm_qoc::propagate::{
    eigendecompose, magnus4_propagate, pwc_propagate, pwm_propagate, spo_propagate, SpectralCache,
};
use pwm_qoc::pulse::{pwm_transform, Layout, PwmConfig};
use pwm_qoc::spin::DEFAULT_EPS;

fn main() -> pwm_qoc::Result<()> {
    let drive = SineDrive::new(3);
    let d = drive.dynamics()?;
    let u = drive.signal();
    let horizon = 100e-6;
    let pairs = [(&u, &d.controls()[0])];
    let reference = magnus4_propagate(d.drift(), &pairs, horizon, 512)?.u;

    for m in [64usize, 256, 1024] {
        let cfg = PwmConfig::from_horizon(horizon, m, Layout::Centered)?;
        let t = Instant::now();
        let pwc = pwc_propagate(d.drift(), &pairs, cfg.tau, horizon)?.u;
        let t_pwc = t.elapsed();
        let t = Instant::now();
        let spo = spo_propagate(&eigendecompose(d.drift())?, &pairs, cfg.tau, horizon)?.u;
        let t_spo = t.elapsed();
        let t = Instant::now();
        let train = pwm_transform(&u, &cfg, DEFAULT_EPS)?;
        let cache = SpectralCache::for_train(&d, &train)?;
        let pwm = pwm_propagate(&cache, &train)?.u;
        let t_pwm = t.elapsed();
        println!("M = {m}");
        for (name, v, dt) in [("pwc", &pwc, t_pwc), ("spo", &spo, t_spo), ("pwm", &pwm, t_pwm)] {
            println!("  {name}: error {:.3e}  {:>8.2?}", distance(v.as_ref(), reference.as_ref()), dt);
        }
    }
    Ok(())
}
