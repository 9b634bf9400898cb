//! Optimize pulse widths and, for comparison, GRAPE amplitudes on the
//! one-spin `custom` experiment.

use pwm_qoc::experiment::{ExperimentConfig, Preset};
use pwm_qoc::optimize::{optimize_grape, optimize_pwm, GrapeInit, PwmInit};

fn main() -> pwm_qoc::Result<()> {
    let cfg = ExperimentConfig::preset(Preset::Custom);
    let problem = cfg.problem()?;
    let pwm = optimize_pwm(&problem, &cfg.optimizer, PwmInit::Random)?;
    let grape = optimize_grape(&problem, &cfg.optimizer, GrapeInit::Random)?;
    for (name, r) in [("pwm", &pwm), ("grape", &grape)] {
        println!(
            "{name:>5}: {:?} after {} iterations, IF {:.3e} ({:.1} ms)",
            r.status,
            r.iterations,
            r.final_infidelity(),
            r.wall_ms.last().copied().unwrap_or(0.0)
        );
    }
    let train = pwm.final_train.unwrap();
    println!("widths / tau: {:?}", train.controls[0].widths.iter().map(|w| (w / train.tau() * 1e3).round() / 1e3).collect::<Vec<_>>());
    Ok(())
}
