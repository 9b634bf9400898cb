//! Analytic width gradient against central differences on a random
//! two-control instance.

use std::f64::consts::PI;

use pwm_qoc::optimize::{infidelity, ControlProblem};
use pwm_qoc::propagate::{pwm_gradient, pwm_propagate, GradientMemory, SpectralCache};
use pwm_qoc::pulse::Layout;
use pwm_qoc::spin::{make_target, Axis, GateKind, SpinSystem};
use rand::SeedableRng;

fn main() -> pwm_qoc::Result<()> {
    let sys = SpinSystem::d_norleucine().subsystem(2)?.with_eps(2.0 * PI * 2e5)?;
    let target = make_target(GateKind::Cnot { control: 1, target: 2 }, 2)?;
    let problem = ControlProblem::new(sys, target, 40e-6, 16, vec![Axis::X, Axis::Y], Layout::Nested)?;
    let train = problem.random_train(&mut rand_chacha::ChaCha8Rng::seed_from_u64(3))?;
    let cache = SpectralCache::for_train(&problem.dynamics(), &train)?;
    let g = pwm_gradient(&cache, &train, &problem.target, GradientMemory::Full)?;

    let base = train.flat_widths();
    let h = 1e-7 * problem.tau();
    let f = |x: &[f64]| {
        let mut t = train.clone();
        t.set_flat_widths(x);
        infidelity(&problem.target, pwm_propagate(&cache, &t).unwrap().u.as_ref()).unwrap()
    };
    println!("IF = {:.6}", g.infidelity);
    println!("{:>4} {:>14} {:>14}", "j", "analytic", "finite diff");
    for (j, a) in g.flat().iter().enumerate().step_by(4) {
        let (mut p, mut m) = (base.clone(), base.clone());
        p[j] += h;
        m[j] -= h;
        println!("{j:>4} {a:>14.6e} {:>14.6e}", (f(&p) - f(&m)) / (2.0 * h));
    }
    Ok(())
}
