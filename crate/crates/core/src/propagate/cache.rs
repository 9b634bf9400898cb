use std::collections::BTreeMap;
use std::fmt;

use faer::MatRef;

use crate::error::{QocError, Result};
use crate::linalg::{c64, mul, CMat};
use crate::pulse::{Layout, PwmTrain};

use super::spectral::{hermitian_eigen, SpectralDecomposition};
use super::Dynamics;

/// Which controls are on, and with which sign: one entry in {−1, 0, +1}
/// per control.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignKey(pub Vec<i8>);

impl SignKey {
    pub fn off(m: usize) -> Self {
        SignKey(vec![0; m])
    }

    pub(crate) fn index(&self) -> usize {
        self.0.iter().rev().fold(0, |acc, &s| acc * 3 + (s + 1) as usize)
    }

    pub(crate) fn from_index(mut idx: usize, m: usize) -> Self {
        let mut v = Vec::with_capacity(m);
        for _ in 0..m {
            v.push((idx % 3) as i8 - 1);
            idx /= 3;
        }
        SignKey(v)
    }
}

impl fmt::Display for SignKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H0")?;
        for (i, s) in self.0.iter().enumerate() {
            match s {
                1 => write!(f, "+e{i}H{i}")?,
                -1 => write!(f, "-e{i}H{i}")?,
                _ => {}
            }
        }
        Ok(())
    }
}

/// Eigendecompositions of every on/off Hamiltonian a layout can produce,
/// plus the basis-change matrices `D_a† D_b` between keys that differ in a
/// single control.
#[derive(Clone, Debug)]
pub struct SpectralCache {
    eps: Vec<f64>,
    layout: Layout,
    dim: usize,
    spectra: BTreeMap<usize, SpectralDecomposition>,
    transitions: BTreeMap<(usize, usize), CMat>,
}

impl SpectralCache {
    /// Build the cache for controls with full amplitudes `eps` (rad/s).
    pub fn new(dynamics: &Dynamics, eps: &[f64], layout: Layout) -> Result<Self> {
        let m = dynamics.num_controls();
        if eps.len() != m {
            return Err(QocError::DimensionMismatch {
                expected: m,
                found: eps.len(),
            });
        }
        match layout {
            Layout::Centered if m != 1 => {
                return Err(QocError::Config("centered layout takes exactly one control".into()))
            }
            Layout::Nested | Layout::Interleaved if m < 2 => {
                return Err(QocError::Config(format!("{layout:?} layout needs two or more controls")))
            }
            _ => {}
        }
        let keys: Vec<SignKey> = match layout {
            Layout::Nested => (0..3usize.pow(m as u32)).map(|i| SignKey::from_index(i, m)).collect(),
            _ => {
                let mut keys = vec![SignKey::off(m)];
                for i in 0..m {
                    for s in [1i8, -1] {
                        let mut k = SignKey::off(m);
                        k.0[i] = s;
                        keys.push(k);
                    }
                }
                keys
            }
        };
        let mut spectra = BTreeMap::new();
        for key in &keys {
            let mut h = dynamics.drift().matrix().to_owned();
            for (i, &s) in key.0.iter().enumerate() {
                if s != 0 {
                    h += dynamics.controls()[i].matrix() * faer::Scale(c64::new(s as f64 * eps[i], 0.0));
                }
            }
            let (eigenvalues, eigenvectors) = hermitian_eigen(h.as_ref())?;
            spectra.insert(
                key.index(),
                SpectralDecomposition {
                    eigenvalues,
                    eigenvectors,
                    source: key.to_string(),
                },
            );
        }
        let mut transitions = BTreeMap::new();
        for a in &keys {
            for b in &keys {
                let differs: Vec<usize> = (0..m).filter(|&i| a.0[i] != b.0[i]).collect();
                if differs.len() != 1 || (a.0[differs[0]] != 0 && b.0[differs[0]] != 0) {
                    continue;
                }
                let (ia, ib) = (a.index(), b.index());
                if transitions.contains_key(&(ia, ib)) {
                    continue;
                }
                let t = mul(spectra[&ia].eigenvectors.adjoint(), spectra[&ib].eigenvectors.as_ref());
                transitions.insert((ib, ia), t.adjoint().to_owned());
                transitions.insert((ia, ib), t);
            }
        }
        Ok(Self {
            eps: eps.to_vec(),
            layout,
            dim: dynamics.dim(),
            spectra,
            transitions,
        })
    }

    /// Cache matching the amplitudes and layout of `train`.
    pub fn for_train(dynamics: &Dynamics, train: &PwmTrain) -> Result<Self> {
        let eps: Vec<f64> = train.controls.iter().map(|c| c.eps).collect();
        Self::new(dynamics, &eps, train.config.layout)
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_controls(&self) -> usize {
        self.eps.len()
    }

    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }

    pub fn keys(&self) -> Vec<SignKey> {
        self.spectra
            .keys()
            .map(|&i| SignKey::from_index(i, self.eps.len()))
            .collect()
    }

    pub fn get(&self, key: &SignKey) -> Result<&SpectralDecomposition> {
        self.spectra
            .get(&key.index())
            .ok_or_else(|| QocError::MissingSpectrum(key.to_string()))
    }

    pub(crate) fn spectrum(&self, idx: usize) -> Result<&SpectralDecomposition> {
        self.spectra
            .get(&idx)
            .ok_or_else(|| QocError::MissingSpectrum(SignKey::from_index(idx, self.eps.len()).to_string()))
    }

    /// `D_to† D_from`.
    pub(crate) fn transition(&self, to: usize, from: usize) -> Result<MatRef<'_, c64>> {
        self.transitions.get(&(to, from)).map(|t| t.as_ref()).ok_or_else(|| {
            let m = self.eps.len();
            QocError::MissingSpectrum(format!(
                "transition {} <- {}",
                SignKey::from_index(to, m),
                SignKey::from_index(from, m)
            ))
        })
    }

    /// Fails unless this cache was built for the amplitudes and layout of `train`.
    pub fn check_train(&self, train: &PwmTrain) -> Result<()> {
        if train.num_controls() != self.eps.len() {
            return Err(QocError::DimensionMismatch {
                expected: self.eps.len(),
                found: train.num_controls(),
            });
        }
        if train.config.layout != self.layout {
            return Err(QocError::Config(format!(
                "cache built for {:?} layout, train is {:?}",
                self.layout, train.config.layout
            )));
        }
        for (i, c) in train.controls.iter().enumerate() {
            if c.eps != self.eps[i] {
                return Err(QocError::Config(format!(
                    "cache built for amplitude {} on control {i}, train has {}",
                    self.eps[i], c.eps
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_index_round_trip() {
        for m in 1..4 {
            for i in 0..3usize.pow(m as u32) {
                assert_eq!(SignKey::from_index(i, m).index(), i);
            }
        }
        assert_eq!(SignKey::off(2).index(), 4);
    }
}
