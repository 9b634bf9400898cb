//! What the spectral cache holds: one eigendecomposition per on/off sign
//! pattern of the controls.

use pwm_qoc::propagate::{Dynamics, SpectralCache};
use pwm_qoc::pulse::Layout;
use pwm_qoc::spin::{Axis, SpinSystem};

fn main() -> pwm_qoc::Result<()> {
    let sys = SpinSystem::d_norleucine().subsystem(3)?;
    let d = Dynamics::from_system(&sys, &[Axis::X, Axis::Y]);
    let eps = [sys.eps(), sys.eps()];
    for layout in [Layout::Nested, Layout::Interleaved] {
        let cache = SpectralCache::new(&d, &eps, layout)?;
        println!("{layout:?}: {} spectra", cache.len());
        for key in cache.keys() {
            let s = cache.get(&key)?;
            let (lo, hi) = (s.eigenvalues[0], s.eigenvalues[s.eigenvalues.len() - 1]);
            println!("  {key}: eigenvalues in [{lo:.3e}, {hi:.3e}] rad/s");
        }
    }
    Ok(())
}
