use crate::error::{QocError, Result};
use crate::linalg::{c64, mul, mul_into, phases, scale_rows, CMat, HermitianOperator, TargetGate};
use crate::optimize::infidelity;
use crate::pulse::ControlSignal;

use super::spectral::hermitian_eigen;
use super::{matrix_bytes, Dynamics, GradientMemory, PropagationResult};

/// Number of steps of length `tau` in `horizon`; they must agree.
pub(crate) fn step_count(tau: f64, horizon: f64) -> Result<usize> {
    if !(tau > 0.0 && horizon > 0.0 && tau.is_finite() && horizon.is_finite()) {
        return Err(QocError::Config(format!("need tau > 0 and T > 0, got {tau}, {horizon}")));
    }
    let n = (horizon / tau).round();
    if n < 1.0 || (n * tau - horizon).abs() > 1e-9 * horizon {
        return Err(QocError::Config(format!("T = {horizon} is not a multiple of tau = {tau}")));
    }
    Ok(n as usize)
}

/// `exp(−iτ H)` for `H = H0 + Σ a_i H_i`, by eigendecomposition.
fn step_unitary(dynamics: &Dynamics, amps: &[f64], tau: f64) -> Result<CMat> {
    let mut h = dynamics.drift().matrix().to_owned();
    for (c, &a) in dynamics.controls().iter().zip(amps) {
        if a != 0.0 {
            h += c.matrix() * faer::Scale(c64::new(a, 0.0));
        }
    }
    let (vals, d) = hermitian_eigen(h.as_ref())?;
    let mut y = d.adjoint().to_owned();
    scale_rows(y.as_mut(), &phases(&vals, tau));
    Ok(mul(d.as_ref(), y.as_ref()))
}

/// `u ← exp(−iτH) u`.
fn apply_step(dynamics: &Dynamics, amps: &[f64], tau: f64, u: &mut CMat, tmp: &mut CMat) -> Result<()> {
    let s = step_unitary(dynamics, amps, tau)?;
    mul_into(tmp.as_mut(), s.as_ref(), u.as_ref());
    std::mem::swap(u, tmp);
    Ok(())
}

fn check_amplitudes(dynamics: &Dynamics, amps: &[Vec<f64>]) -> Result<usize> {
    if amps.len() != dynamics.num_controls() {
        return Err(QocError::DimensionMismatch {
            expected: dynamics.num_controls(),
            found: amps.len(),
        });
    }
    let steps = amps.first().map_or(0, |a| a.len());
    for a in amps {
        if a.len() != steps {
            return Err(QocError::DimensionMismatch {
                expected: steps,
                found: a.len(),
            });
        }
    }
    Ok(steps)
}

/// `∏_k exp(−iτ(H0 + Σ_i amps[i][k] H_i))`, latest step leftmost.
pub fn pwc_propagate_amplitudes(
    dynamics: &Dynamics,
    amps: &[Vec<f64>],
    tau: f64,
) -> Result<PropagationResult> {
    let steps = check_amplitudes(dynamics, amps)?;
    let n = dynamics.dim();
    let mut u = CMat::identity(n, n);
    let mut tmp = CMat::zeros(n, n);
    let mut a = vec![0.0; amps.len()];
    for k in 0..steps {
        for (ai, row) in a.iter_mut().zip(amps) {
            *ai = row[k];
        }
        apply_step(dynamics, &a, tau, &mut u, &mut tmp)?;
    }
    Ok(PropagationResult::plain(u))
}

/// Exponential midpoint rule: each step uses the controls at its midpoint.
pub fn pwc_propagate(
    drift: &HermitianOperator,
    controls: &[(&ControlSignal, &HermitianOperator)],
    tau: f64,
    horizon: f64,
) -> Result<PropagationResult> {
    let steps = step_count(tau, horizon)?;
    for (s, _) in controls {
        s.ensure_covers(0.0, horizon)?;
    }
    let dynamics = Dynamics::new(drift.clone(), controls.iter().map(|(_, h)| (*h).clone()).collect())?;
    let amps: Vec<Vec<f64>> = controls
        .iter()
        .map(|(s, _)| (0..steps).map(|k| s.value_at((k as f64 + 0.5) * tau)).collect())
        .collect();
    pwc_propagate_amplitudes(&dynamics, &amps, tau)
}

#[derive(Clone, Debug)]
pub struct GrapeGradient {
    pub u: CMat,
    pub infidelity: f64,
    /// `∂IF/∂amps[i][k]`.
    pub gradient: Vec<Vec<f64>>,
}

/// First-order GRAPE gradient
/// `∂IF/∂u_i^k = −(1/N) Re tr[W† U_{M..k+1} (−iτ H_i) U_{k..1}]`.
pub fn grape_gradient(
    dynamics: &Dynamics,
    amps: &[Vec<f64>],
    tau: f64,
    target: &TargetGate,
    memory: GradientMemory,
) -> Result<GrapeGradient> {
    let steps = check_amplitudes(dynamics, amps)?;
    let n = dynamics.dim();
    if target.dim() != n {
        return Err(QocError::DimensionMismatch {
            expected: n,
            found: target.dim(),
        });
    }
    let bytes = matrix_bytes(n);
    let stride = memory.stride(steps, 2 * bytes, bytes)?;
    let at = |k: usize| -> Vec<f64> { amps.iter().map(|row| row[k]).collect() };

    let mut u = CMat::identity(n, n);
    let mut tmp = CMat::zeros(n, n);
    let mut checkpoints = Vec::new();
    for k in 0..steps {
        if k % stride == 0 {
            checkpoints.push(u.clone());
        }
        apply_step(dynamics, &at(k), tau, &mut u, &mut tmp)?;
    }

    let norm = n as f64;
    let mut grad = vec![vec![0.0; steps]; amps.len()];
    let mut back = target.matrix().adjoint().to_owned();
    let mut after: Vec<CMat> = Vec::with_capacity(stride);
    let mut step_u: Vec<CMat> = Vec::with_capacity(stride);
    let mut p = CMat::zeros(n, n);
    for (b, ckpt) in checkpoints.iter().enumerate().rev() {
        let start = b * stride;
        let end = (start + stride).min(steps);
        after.clear();
        step_u.clear();
        let mut x = ckpt.clone();
        for k in start..end {
            let s = step_unitary(dynamics, &at(k), tau)?;
            mul_into(tmp.as_mut(), s.as_ref(), x.as_ref());
            std::mem::swap(&mut x, &mut tmp);
            after.push(x.clone());
            step_u.push(s);
        }
        for k in (start..end).rev() {
            let j = k - start;
            mul_into(p.as_mut(), after[j].as_ref(), back.as_ref());
            for (i, c) in dynamics.controls().iter().enumerate() {
                let h = c.matrix();
                let mut t = c64::new(0.0, 0.0);
                for col in 0..n {
                    for row in 0..n {
                        t += h[(row, col)] * p[(col, row)];
                    }
                }
                grad[i][k] = -tau * t.im / norm;
            }
            mul_into(tmp.as_mut(), back.as_ref(), step_u[j].as_ref());
            std::mem::swap(&mut back, &mut tmp);
        }
    }
    let inf = infidelity(target, u.as_ref())?;
    Ok(GrapeGradient {
        u,
        infidelity: inf,
        gradient: grad,
    })
}

/// Fourth-order commutator-free Magnus integrator with `steps` equal steps
/// (two exponentials per step, controls sampled at the Gauss nodes). Used as
/// an accuracy reference for the second-order schemes.
pub fn magnus4_propagate(
    drift: &HermitianOperator,
    controls: &[(&ControlSignal, &HermitianOperator)],
    horizon: f64,
    steps: usize,
) -> Result<PropagationResult> {
    if steps == 0 || !(horizon > 0.0 && horizon.is_finite()) {
        return Err(QocError::Config(format!("need steps > 0 and T > 0, got {steps}, {horizon}")));
    }
    for (s, _) in controls {
        s.ensure_covers(0.0, horizon)?;
    }
    let dynamics = Dynamics::new(drift.clone(), controls.iter().map(|(_, h)| (*h).clone()).collect())?;
    let r3 = 3f64.sqrt();
    let (c1, c2) = (0.5 - r3 / 6.0, 0.5 + r3 / 6.0);
    let (a1, a2) = (0.25 - r3 / 6.0, 0.25 + r3 / 6.0);
    let h = horizon / steps as f64;
    let n = dynamics.dim();
    let mut u = CMat::identity(n, n);
    let mut tmp = CMat::zeros(n, n);
    let mut first = vec![0.0; controls.len()];
    let mut second = vec![0.0; controls.len()];
    for k in 0..steps {
        let t = k as f64 * h;
        for (i, (s, _)) in controls.iter().enumerate() {
            let (u1, u2) = (s.value_at(t + c1 * h), s.value_at(t + c2 * h));
            // each exponent carries half of the drift
            first[i] = 2.0 * (a2 * u1 + a1 * u2);
            second[i] = 2.0 * (a1 * u1 + a2 * u2);
        }
        apply_step(&dynamics, &first, 0.5 * h, &mut u, &mut tmp)?;
        apply_step(&dynamics, &second, 0.5 * h, &mut u, &mut tmp)?;
    }
    Ok(PropagationResult::plain(u))
}
