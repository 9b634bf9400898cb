//! PWM propagation in the eigenbasis of the active Hamiltonian.
//!
//! Inside one interval the Hamiltonian switches only when a pulse edge is
//! crossed. The state is carried in the eigenbasis of whichever on/off
//! Hamiltonian is active, so a segment costs a diagonal phase and an edge
//! costs one product with a cached `D_a† D_b`.
//!
//! The width gradient follows from moving individual edges: shifting the
//! instant between Hamiltonians `H_b` (before) and `H_a` (after) by `dt`
//! changes `tr W†U` by `−i dt tr[W† U(T,t) (H_b − H_a) U(t,0)]`.

use crate::error::{QocError, Result};
use crate::linalg::{
    mul, mul_into, phases, scale_cols, scale_rows, weighted_diag_of_product, CMat, TargetGate,
};
use crate::optimize::infidelity;
use crate::pulse::{Layout, PwmTrain};

use super::cache::{SignKey, SpectralCache};
use super::{matrix_bytes, GradientMemory, PropagationResult, StageCache};

#[derive(Clone, Copy, Debug)]
struct Edge {
    /// Time from the start of the interval.
    offset: f64,
    control: usize,
    rising: bool,
}

struct Engine<'a> {
    cache: &'a SpectralCache,
    train: &'a PwmTrain,
    off: usize,
    pow3: Vec<isize>,
}

impl<'a> Engine<'a> {
    fn new(cache: &'a SpectralCache, train: &'a PwmTrain) -> Result<Self> {
        train.validate()?;
        cache.check_train(train)?;
        let m = train.num_controls();
        let pow3 = (0..m).map(|i| 3isize.pow(i as u32)).collect();
        Ok(Self {
            cache,
            train,
            off: SignKey::off(m).index(),
            pow3,
        })
    }

    fn edges(&self, k: usize, out: &mut Vec<Edge>) {
        out.clear();
        let tau = self.train.tau();
        let c = &self.train.controls;
        let push = |i: usize| {
            let center = 0.5 * tau + c[i].shift;
            let h = 0.5 * c[i].duration(k);
            (
                Edge {
                    offset: center - h,
                    control: i,
                    rising: true,
                },
                Edge {
                    offset: center + h,
                    control: i,
                    rising: false,
                },
            )
        };
        match self.train.config.layout {
            Layout::Centered | Layout::Interleaved => {
                for i in 0..c.len() {
                    let (on, off) = push(i);
                    out.push(on);
                    out.push(off);
                }
            }
            Layout::Nested => {
                let mut order: Vec<usize> = (0..c.len()).collect();
                order.sort_by(|&a, &b| c[b].duration(k).total_cmp(&c[a].duration(k)));
                let pairs: Vec<(Edge, Edge)> = order.iter().map(|&i| push(i)).collect();
                out.extend(pairs.iter().map(|p| p.0));
                out.extend(pairs.iter().rev().map(|p| p.1));
            }
        }
    }

    /// Key index after crossing `e` from key `cur`.
    fn step_key(&self, cur: usize, e: &Edge, k: usize) -> usize {
        let s = self.train.controls[e.control].sign(k) as isize;
        let d = s * self.pow3[e.control];
        (cur as isize + if e.rising { d } else { -d }) as usize
    }

    /// Advance `x` (eigenbasis of the off key) through interval `k`, storing
    /// the state before and after every edge when `record` is given.
    fn forward_interval(
        &self,
        k: usize,
        x: &mut CMat,
        tmp: &mut CMat,
        edges: &mut Vec<Edge>,
        mut record: Option<&mut [CMat]>,
    ) -> Result<()> {
        self.edges(k, edges);
        let mut key = self.off;
        let mut t = 0.0;
        for (j, e) in edges.iter().enumerate() {
            let spec = self.cache.spectrum(key)?;
            scale_rows(x.as_mut(), &phases(&spec.eigenvalues, e.offset - t));
            let next = self.step_key(key, e, k);
            if let Some(rec) = record.as_deref_mut() {
                rec[2 * j].copy_from(&*x);
            }
            mul_into(tmp.as_mut(), self.cache.transition(next, key)?, x.as_ref());
            std::mem::swap(x, tmp);
            if let Some(rec) = record.as_deref_mut() {
                rec[2 * j + 1].copy_from(&*x);
            }
            key = next;
            t = e.offset;
        }
        let spec = self.cache.spectrum(self.off)?;
        scale_rows(x.as_mut(), &phases(&spec.eigenvalues, self.train.tau() - t));
        Ok(())
    }

    fn initial_state(&self) -> Result<CMat> {
        Ok(self.cache.spectrum(self.off)?.eigenvectors.adjoint().to_owned())
    }

    fn close(&self, x: &CMat) -> Result<CMat> {
        Ok(mul(self.cache.spectrum(self.off)?.eigenvectors.as_ref(), x.as_ref()))
    }

    fn edges_per_interval(&self) -> usize {
        2 * self.train.num_controls()
    }

    /// Propagate, keeping the state at every `stride`-th interval start.
    fn propagate(&self, stride: Option<usize>) -> Result<PropagationResult> {
        let n = self.cache.dim();
        let mut x = self.initial_state()?;
        let mut tmp = CMat::zeros(n, n);
        let mut edges = Vec::with_capacity(self.edges_per_interval());
        let mut checkpoints = Vec::new();
        for k in 0..self.train.intervals() {
            if let Some(s) = stride {
                if k % s == 0 {
                    checkpoints.push(x.clone());
                }
            }
            self.forward_interval(k, &mut x, &mut tmp, &mut edges, None)?;
        }
        Ok(PropagationResult {
            u: self.close(&x)?,
            stage_cache: stride.map(|_| StageCache { checkpoints }),
            stride: stride.unwrap_or(0),
        })
    }

    fn gradient(&self, target: &TargetGate, staged: PropagationResult) -> Result<PwmGradient> {
        let n = self.cache.dim();
        if target.dim() != n {
            return Err(QocError::DimensionMismatch {
                expected: n,
                found: target.dim(),
            });
        }
        let stride = staged.stride;
        let checkpoints = &staged
            .stage_cache
            .as_ref()
            .ok_or_else(|| QocError::Config("propagation kept no checkpoints".into()))?
            .checkpoints;
        let intervals = self.train.intervals();
        let per = 2 * self.edges_per_interval();
        let mut store: Vec<CMat> = (0..stride.min(intervals) * per).map(|_| CMat::zeros(n, n)).collect();
        let mut x = CMat::zeros(n, n);
        let mut tmp = CMat::zeros(n, n);
        let mut edges = Vec::with_capacity(self.edges_per_interval());
        let mut grad = vec![vec![0.0; intervals]; self.train.num_controls()];
        let norm = n as f64;

        let off_spec = self.cache.spectrum(self.off)?;
        let mut r = mul(target.matrix().adjoint(), off_spec.eigenvectors.as_ref());
        let tau = self.train.tau();

        for (b, ckpt) in checkpoints.iter().enumerate().rev() {
            let start = b * stride;
            let end = (start + stride).min(intervals);
            x.copy_from(ckpt);
            for k in start..end {
                let slot = (k - start) * per;
                self.forward_interval(k, &mut x, &mut tmp, &mut edges, Some(&mut store[slot..slot + per]))?;
            }
            for k in (start..end).rev() {
                let slot = (k - start) * per;
                self.edges(k, &mut edges);
                let mut keys = Vec::with_capacity(edges.len() + 1);
                keys.push(self.off);
                for e in edges.iter() {
                    let last = *keys.last().unwrap();
                    keys.push(self.step_key(last, e, k));
                }
                let last_offset = edges.last().map_or(0.0, |e| e.offset);
                scale_cols(r.as_mut(), &phases(&off_spec.eigenvalues, tau - last_offset));
                for j in (0..edges.len()).rev() {
                    let (before, after) = (keys[j], keys[j + 1]);
                    let sb = self.cache.spectrum(before)?;
                    let sa = self.cache.spectrum(after)?;
                    mul_into(tmp.as_mut(), r.as_ref(), self.cache.transition(after, before)?);
                    let q = weighted_diag_of_product(store[slot + 2 * j].as_ref(), tmp.as_ref(), &sb.eigenvalues)
                        - weighted_diag_of_product(store[slot + 2 * j + 1].as_ref(), r.as_ref(), &sa.eigenvalues);
                    let dt = -q.im / norm;
                    let e = edges[j];
                    let s = self.train.controls[e.control].sign(k);
                    grad[e.control][k] += if e.rising { -0.5 * s * dt } else { 0.5 * s * dt };
                    std::mem::swap(&mut r, &mut tmp);
                    let prev = if j == 0 { 0.0 } else { edges[j - 1].offset };
                    scale_cols(r.as_mut(), &phases(&sb.eigenvalues, e.offset - prev));
                }
            }
        }
        let inf = infidelity(target, staged.u.as_ref())?;
        Ok(PwmGradient {
            result: staged,
            infidelity: inf,
            gradient: grad,
        })
    }
}

/// Infidelity, its gradient with respect to every signed width
/// (`gradient[control][interval]`), and the propagation it came from.
#[derive(Clone, Debug)]
pub struct PwmGradient {
    pub result: PropagationResult,
    pub infidelity: f64,
    pub gradient: Vec<Vec<f64>>,
}

impl PwmGradient {
    pub fn flat(&self) -> Vec<f64> {
        self.gradient.iter().flatten().copied().collect()
    }
}

/// `U(T, 0)` for a train of any layout.
pub fn pwm_propagate(cache: &SpectralCache, train: &PwmTrain) -> Result<PropagationResult> {
    Engine::new(cache, train)?.propagate(None)
}

fn stride_for(cache: &SpectralCache, train: &PwmTrain, memory: GradientMemory) -> Result<usize> {
    let bytes = matrix_bytes(cache.dim());
    memory.stride(train.intervals(), 4 * train.num_controls() * bytes, bytes)
}

/// `U(T, 0)` plus the checkpoints a later [`pwm_gradient_staged`] needs.
pub fn pwm_propagate_staged(
    cache: &SpectralCache,
    train: &PwmTrain,
    memory: GradientMemory,
) -> Result<PropagationResult> {
    let stride = stride_for(cache, train, memory)?;
    Engine::new(cache, train)?.propagate(Some(stride))
}

/// Gradient from a propagation that already stored its checkpoints.
pub fn pwm_gradient_staged(
    cache: &SpectralCache,
    train: &PwmTrain,
    target: &TargetGate,
    staged: PropagationResult,
) -> Result<PwmGradient> {
    Engine::new(cache, train)?.gradient(target, staged)
}

pub fn pwm_gradient(
    cache: &SpectralCache,
    train: &PwmTrain,
    target: &TargetGate,
    memory: GradientMemory,
) -> Result<PwmGradient> {
    let staged = pwm_propagate_staged(cache, train, memory)?;
    pwm_gradient_staged(cache, train, target, staged)
}

fn require(train: &PwmTrain, layout: Layout, controls: Option<usize>) -> Result<()> {
    if train.config.layout != layout {
        return Err(QocError::Config(format!(
            "expected a {layout:?} train, got {:?}",
            train.config.layout
        )));
    }
    if let Some(m) = controls {
        if train.num_controls() != m {
            return Err(QocError::DimensionMismatch {
                expected: m,
                found: train.num_controls(),
            });
        }
    }
    Ok(())
}

/// One control, centered pulses.
pub fn pwm_propagate_1(cache: &SpectralCache, train: &PwmTrain) -> Result<PropagationResult> {
    require(train, Layout::Centered, Some(1))?;
    pwm_propagate(cache, train)
}

/// Two controls, the shorter pulse nested inside the longer one.
pub fn pwm_propagate_2(cache: &SpectralCache, train: &PwmTrain) -> Result<PropagationResult> {
    require(train, Layout::Nested, Some(2))?;
    pwm_propagate(cache, train)
}

/// Controls in disjoint sub-slots.
pub fn pwm_propagate_interleaved(cache: &SpectralCache, train: &PwmTrain) -> Result<PropagationResult> {
    require(train, Layout::Interleaved, None)?;
    pwm_propagate(cache, train)
}

pub fn pwm_gradient_1(
    cache: &SpectralCache,
    train: &PwmTrain,
    target: &TargetGate,
    memory: GradientMemory,
) -> Result<PwmGradient> {
    require(train, Layout::Centered, Some(1))?;
    pwm_gradient(cache, train, target, memory)
}

pub fn pwm_gradient_2(
    cache: &SpectralCache,
    train: &PwmTrain,
    target: &TargetGate,
    memory: GradientMemory,
) -> Result<PwmGradient> {
    require(train, Layout::Nested, Some(2))?;
    pwm_gradient(cache, train, target, memory)
}

pub fn pwm_gradient_interleaved(
    cache: &SpectralCache,
    train: &PwmTrain,
    target: &TargetGate,
    memory: GradientMemory,
) -> Result<PwmGradient> {
    require(train, Layout::Interleaved, None)?;
    pwm_gradient(cache, train, target, memory)
}
