//! Test oracles that share no code with the propagation engine.
#![allow(dead_code)]

use faer::Mat;
use pwm_qoc::linalg::{c64, CMat, HermitianOperator};
use pwm_qoc::propagate::Dynamics;
use pwm_qoc::pulse::PwmTrain;
use pwm_qoc::spin::{Axis, SpinSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn matmul(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows();
    Mat::from_fn(n, b.ncols(), |i, j| (0..a.ncols()).map(|k| a[(i, k)] * b[(k, j)]).sum())
}

/// `exp(−i t H)` by scaling and squaring of a Taylor series.
pub fn expm_taylor(h: &CMat, t: f64) -> CMat {
    let n = h.nrows();
    let norm: f64 = (0..n)
        .map(|i| (0..n).map(|j| h[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
        * t.abs();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = Mat::from_fn(n, n, |i, j| h[(i, j)] * c64::new(0.0, -t * scale));
    let mut term = Mat::<c64>::identity(n, n);
    let mut sum = Mat::<c64>::identity(n, n);
    for k in 1..=24 {
        term = matmul(&term, &a);
        let inv = 1.0 / k as f64;
        term = Mat::from_fn(n, n, |i, j| term[(i, j)] * inv);
        sum = Mat::from_fn(n, n, |i, j| sum[(i, j)] + term[(i, j)]);
    }
    for _ in 0..squarings {
        sum = matmul(&sum, &sum);
    }
    sum
}

pub fn hamiltonian(dynamics: &Dynamics, amps: &[f64]) -> CMat {
    let n = dynamics.dim();
    let d = dynamics.drift().matrix();
    Mat::from_fn(n, n, |i, j| {
        let mut v = d[(i, j)];
        for (c, &a) in dynamics.controls().iter().zip(amps) {
            v += c.matrix()[(i, j)] * a;
        }
        v
    })
}

/// Time-ordered product over `(duration, amplitudes)` segments.
pub fn product(dynamics: &Dynamics, segments: &[(f64, Vec<f64>)]) -> CMat {
    let n = dynamics.dim();
    let mut u = Mat::<c64>::identity(n, n);
    for (d, amps) in segments {
        if *d == 0.0 {
            continue;
        }
        u = matmul(&expm_taylor(&hamiltonian(dynamics, amps), *d), &u);
    }
    u
}

/// Slice `[0, T]` at every pulse edge and read off which pulses are on.
pub fn train_segments(train: &PwmTrain) -> Vec<(f64, Vec<f64>)> {
    let mut cuts = vec![0.0, train.horizon()];
    for i in 0..train.num_controls() {
        for k in 0..train.intervals() {
            let (a, b) = train.pulse_support(i, k);
            cuts.push(a);
            cuts.push(b);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let amps = (0..train.num_controls())
                .map(|i| {
                    let c = &train.controls[i];
                    (0..train.intervals())
                        .find(|&k| {
                            let (a, b) = train.pulse_support(i, k);
                            mid > a && mid < b
                        })
                        .map_or(0.0, |k| c.signed_amplitude(k))
                })
                .collect();
            (w[1] - w[0], amps)
        })
        .collect()
}

pub fn train_oracle(dynamics: &Dynamics, train: &PwmTrain) -> CMat {
    product(dynamics, &train_segments(train))
}

pub fn frob(a: &CMat, b: &CMat) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    s.sqrt()
}

pub fn unitarity(u: &CMat) -> f64 {
    let n = u.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut g = c64::new(0.0, 0.0);
            for k in 0..n {
                g += u[(k, i)].conj() * u[(k, j)];
            }
            if i == j {
                g -= c64::new(1.0, 0.0);
            }
            s += g.norm_sqr();
        }
    }
    s.sqrt()
}

/// `1 − Re tr(W†U)/N` computed entry by entry.
pub fn infidelity_oracle(w: &CMat, u: &CMat) -> f64 {
    let n = w.nrows();
    let mut t = c64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            t += w[(k, i)].conj() * u[(k, i)];
        }
    }
    1.0 - t.re / n as f64
}

/// Spin system with `m` spins, shifts up to `shift_hz`, couplings up to `j_hz`.
pub fn random_system(rng: &mut ChaCha8Rng, m: usize, shift_hz: f64, j_hz: f64, eps: f64) -> SpinSystem {
    let shifts = (0..m).map(|_| rng.random_range(-shift_hz..shift_hz)).collect();
    let couplings = (0..m)
        .map(|k| (0..k).map(|_| rng.random_range(-j_hz..j_hz)).collect())
        .collect();
    SpinSystem::new(shifts, couplings, eps).unwrap()
}

pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let h = Mat::from_fn(n, n, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let herm = Mat::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    expm_taylor(&herm, 1.0)
}

pub fn dynamics(sys: &SpinSystem, axes: &[Axis]) -> Dynamics {
    Dynamics::from_system(sys, axes)
}

pub fn hermitian(m: CMat) -> HermitianOperator {
    HermitianOperator::new(m).unwrap()
}

/// Largest componentwise deviation relative to the largest reference entry.
pub fn rel_err(got: &[f64], reference: &[f64]) -> f64 {
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dev = got
        .iter()
        .zip(reference)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    dev / scale
}
