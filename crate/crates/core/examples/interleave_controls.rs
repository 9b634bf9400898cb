//! Two controls as nested pulses, then interleaved into disjoint sub-slots.
//! Both layouts carry the same areas; the propagators differ by pulse-ordering
//! terms that shrink with the per-interval areas.

use std::f64::consts::PI;

use pwm_qoc::experiment::SineDrive;
use pwm_qoc::linalg::distance;
use pwm_qoc::propagate::{pwm_propagate, Dynamics, SpectralCache};
use pwm_qoc::pulse::{interleave, pwm_transform_many, ControlSignal, Layout, PwmConfig};
use pwm_qoc::spin::Axis;

fn main() -> pwm_qoc::Result<()> {
    let sys = SineDrive::new(2).system()?;
    let d = Dynamics::from_system(&sys, &[Axis::X, Axis::Y]);
    let eps = sys.eps();
    let ux = ControlSignal::sine(2.0 * PI * 20e3, 2.0 * PI * 40e3, 0.0);
    let uy = ControlSignal::sine(2.0 * PI * 15e3, 2.0 * PI * 60e3, 1.0);
    for m in [50usize, 100, 200, 400] {
        let cfg = PwmConfig::from_horizon(50e-6, m, Layout::Nested)?;
        let nested = pwm_transform_many(&[ux.clone(), uy.clone()], &cfg, &[eps, eps])?;
        let inter = interleave(&nested)?;
        let un = pwm_propagate(&SpectralCache::for_train(&d, &nested)?, &nested)?.u;
        let ui = pwm_propagate(&SpectralCache::for_train(&d, &inter)?, &inter)?.u;
        println!("M = {m:>3}: ||U_nested - U_interleaved|| = {:.3e}", distance(un.as_ref(), ui.as_ref()));
    }
    Ok(())
}
