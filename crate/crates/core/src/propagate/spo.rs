use crate::error::{QocError, Result};
use crate::linalg::{c64, mul, mul_into, phases, scale_rows, CMat, HermitianOperator};
use crate::pulse::ControlSignal;

use super::pwc::step_count;
use super::spectral::{hermitian_eigen, SpectralDecomposition};
use super::PropagationResult;

/// `ū_i^(k) = (1/τ) ∫ u_i` over each interval.
pub fn interval_means(signal: &ControlSignal, tau: f64, steps: usize) -> Result<Vec<f64>> {
    (0..steps)
        .map(|k| Ok(signal.integral(k as f64 * tau, (k + 1) as f64 * tau)? / tau))
        .collect()
}

/// Strang splitting `∏_k e^{−iH0τ/2} e^{−iτ Σ ū_i H_i} e^{−iH0τ/2}` with
/// interval-mean controls.
pub fn spo_propagate(
    drift: &SpectralDecomposition,
    controls: &[(&ControlSignal, &HermitianOperator)],
    tau: f64,
    horizon: f64,
) -> Result<PropagationResult> {
    let steps = step_count(tau, horizon)?;
    let mut means = Vec::with_capacity(controls.len());
    for (s, _) in controls {
        s.ensure_covers(0.0, horizon)?;
        means.push(interval_means(s, tau, steps)?);
    }
    let ops: Vec<&HermitianOperator> = controls.iter().map(|(_, h)| *h).collect();
    spo_propagate_means(drift, &ops, &means, tau)
}

pub fn spo_propagate_means(
    drift: &SpectralDecomposition,
    controls: &[&HermitianOperator],
    means: &[Vec<f64>],
    tau: f64,
) -> Result<PropagationResult> {
    let n = drift.dim();
    if means.len() != controls.len() {
        return Err(QocError::DimensionMismatch {
            expected: controls.len(),
            found: means.len(),
        });
    }
    for c in controls {
        if c.dim() != n {
            return Err(QocError::DimensionMismatch {
                expected: n,
                found: c.dim(),
            });
        }
    }
    let steps = means.first().map_or(0, |m| m.len());
    let d0 = &drift.eigenvectors;
    let half = phases(&drift.eigenvalues, 0.5 * tau);
    let mut x = d0.adjoint().to_owned();
    let mut tmp = CMat::zeros(n, n);

    // A single control keeps one spectrum; only its eigenvalues scale.
    let single = if controls.len() == 1 {
        let (vals, d1) = hermitian_eigen(controls[0].matrix())?;
        let to_control = mul(d1.adjoint(), d0.as_ref());
        let from_control = to_control.adjoint().to_owned();
        Some((vals, to_control, from_control))
    } else {
        None
    };

    for k in 0..steps {
        scale_rows(x.as_mut(), &half);
        match &single {
            Some((vals, to_c, from_c)) => {
                let u = means[0][k];
                mul_into(tmp.as_mut(), to_c.as_ref(), x.as_ref());
                let ph: Vec<c64> = vals.iter().map(|&l| c64::cis(-l * u * tau)).collect();
                scale_rows(tmp.as_mut(), &ph);
                mul_into(x.as_mut(), from_c.as_ref(), tmp.as_ref());
            }
            None => {
                let mut h = CMat::zeros(n, n);
                for (c, m) in controls.iter().zip(means) {
                    if m[k] != 0.0 {
                        h += c.matrix() * faer::Scale(c64::new(m[k], 0.0));
                    }
                }
                let (vals, dk) = hermitian_eigen(h.as_ref())?;
                let a = mul(dk.adjoint(), d0.as_ref());
                mul_into(tmp.as_mut(), a.as_ref(), x.as_ref());
                scale_rows(tmp.as_mut(), &phases(&vals, tau));
                mul_into(x.as_mut(), a.adjoint(), tmp.as_ref());
            }
        }
        scale_rows(x.as_mut(), &half);
    }
    Ok(PropagationResult::plain(mul(d0.as_ref(), x.as_ref())))
}

