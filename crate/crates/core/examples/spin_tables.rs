//! Spin systems from the built-in table or a CSV file, and the operators
//! and targets built from them. Tables hold Hz; operators are in rad/s.
//!
//! Usage: cargo run --example spin_tables [table.csv]

use pwm_qoc::linalg::frobenius;
use pwm_qoc::spin::{build_control, build_drift, load_spin_table, make_target, Axis, GateKind, DEFAULT_EPS};

fn main() -> pwm_qoc::Result<()> {
    let source = std::env::args().nth(1).unwrap_or_else(|| "d-norleucine".into());
    let sys = load_spin_table(&source, DEFAULT_EPS)?;
    println!("{} spins from {source}", sys.num_spins());
    for (k, w) in sys.shifts().iter().enumerate() {
        println!("  spin {}: shift {w:.1} Hz", k + 1);
    }
    // the table format round-trips
    print!("{}", sys.to_table_string());

    let small = sys.subsystem(3)?;
    let h0 = build_drift(&small);
    let hx = build_control(&small, Axis::X);
    println!("3-spin drift: dim {}, ||H0||_F = {:.3e}", h0.dim(), frobenius(h0.matrix()));
    println!("x control: ||Hx||_F = {:.3e}", frobenius(hx.matrix()));
    let cnot = make_target(GateKind::Cnot { control: 1, target: 2 }, 3)?;
    println!("CNOT(1,2) target on {} levels", cnot.dim());
    Ok(())
}
