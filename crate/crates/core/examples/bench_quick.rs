//! A small accuracy-matched timing grid (PWM vs PWC) on the sine drive.
//! `qoc bench` runs the full grid.

use pwm_qoc::experiment::{run_bench, write_bench_csv, BenchGrid, SineDrive};

fn main() -> pwm_qoc::Result<()> {
    let grid = BenchGrid {
        horizons: vec![20e-6],
        exponents: vec![1, 2, 3],
        drive: SineDrive::new(3),
        ..BenchGrid::default()
    };
    let cells = run_bench(&grid)?;
    write_bench_csv(&cells, std::io::stdout().lock())?;
    Ok(())
}
