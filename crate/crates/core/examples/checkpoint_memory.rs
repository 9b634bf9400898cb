//! Gradient memory modes: full storage, fixed checkpoint stride, and a byte
//! budget. All give the same gradient.

use std::time::Instant;

use pwm_qoc::experiment::{ExperimentConfig, Preset};
use pwm_qoc::propagate::{pwm_gradient, GradientMemory, SpectralCache};
use rand::SeedableRng;

fn main() -> pwm_qoc::Result<()> {
    let mut cfg = ExperimentConfig::preset(Preset::ThreeQubitRotation);
    cfg.intervals = 4000;
    let problem = cfg.problem()?;
    let train = problem.random_train(&mut rand_chacha::ChaCha8Rng::seed_from_u64(1))?;
    let cache = SpectralCache::for_train(&problem.dynamics(), &train)?;
    let mut reference = None;
    for memory in [
        GradientMemory::Full,
        GradientMemory::Stride(64),
        GradientMemory::Budget(1 << 20),
    ] {
        let t = Instant::now();
        let g = pwm_gradient(&cache, &train, &problem.target, memory)?;
        let same = reference.get_or_insert_with(|| g.flat()) == &g.flat();
        println!("{memory:?}: IF {:.6e}, {:?}, identical to full storage: {same}", g.infidelity, t.elapsed());
    }
    match pwm_gradient(&cache, &train, &problem.target, GradientMemory::Budget(1000)) {
        Err(e) => println!("Budget(1000): {e}"),
        Ok(_) => println!("Budget(1000) unexpectedly fit"),
    }
    Ok(())
}
