//! Several seeded starts of a reduced three-qubit rotation, written to disk
//! the same way `qoc optimize` does.
//!
//! Usage: cargo run --release --example multi_start [out-dir]

use std::path::PathBuf;

use pwm_qoc::experiment::{run_experiment, write_experiment, ExperimentConfig, Preset};

fn main() -> pwm_qoc::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "multi-start-out".into()).into();
    let mut cfg = ExperimentConfig::preset(Preset::ThreeQubitRotation);
    cfg.horizon = 2e-3;
    cfg.intervals = 400;
    cfg.starts = 4;
    cfg.parallelism = 2;
    cfg.optimizer.max_iterations = 150;
    let (summary, reports) = run_experiment(&cfg)?;
    for r in &summary.runs {
        println!("seed {}: {:?} after {} iterations, IF {:.3e}", r.seed, r.status, r.iterations, r.final_infidelity);
    }
    write_experiment(&out, &summary, &reports)?;
    println!("wrote {}", out.display());
    Ok(())
}
