use faer::{Mat, MatRef, Side};

use crate::error::{QocError, Result};
use crate::linalg::{c64, phases, scale_cols, CMat, HermitianOperator};

/// `H = D Λ D†` with ascending eigenvalues and a fixed eigenvector phase.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
    pub source: String,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `D Λ D†`.
    pub fn reconstruct(&self) -> CMat {
        let mut dl = self.eigenvectors.clone();
        let l: Vec<c64> = self.eigenvalues.iter().map(|&x| c64::new(x, 0.0)).collect();
        scale_cols(dl.as_mut(), &l);
        crate::linalg::mul(dl.as_ref(), self.eigenvectors.adjoint())
    }
}

pub fn eigendecompose(h: &HermitianOperator) -> Result<SpectralDecomposition> {
    eigendecompose_named(h, "H")
}

pub fn eigendecompose_named(h: &HermitianOperator, source: &str) -> Result<SpectralDecomposition> {
    let (eigenvalues, eigenvectors) = hermitian_eigen(h.matrix())?;
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        source: source.to_string(),
    })
}

/// Eigen-pairs of a matrix already known to be Hermitian.
pub(crate) fn hermitian_eigen(h: MatRef<'_, c64>) -> Result<(Vec<f64>, CMat)> {
    let evd = h.self_adjoint_eigen(Side::Lower).map_err(|_| QocError::Eigen)?;
    let n = h.nrows();
    let s = evd.S().column_vector();
    let mut order: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(QocError::Eigen);
    }
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let u = evd.U();
    let mut d = Mat::<c64>::zeros(n, n);
    for (j, &src) in order.iter().enumerate() {
        let col = u.col(src);
        let pivot = (0..n).find(|&r| col[r].norm() > 1e-8).unwrap_or(0);
        let p = col[pivot];
        let phase = if p.norm() > 0.0 { p.conj() * (1.0 / p.norm()) } else { c64::new(1.0, 0.0) };
        for r in 0..n {
            d[(r, j)] = col[r] * phase;
        }
    }
    Ok((order.iter().map(|&i| vals[i]).collect(), d))
}

/// `D diag(e^{−iλt}) D†`.
pub fn expm_spectral(spec: &SpectralDecomposition, t: f64) -> CMat {
    let mut dp = spec.eigenvectors.clone();
    scale_cols(dp.as_mut(), &phases(&spec.eigenvalues, t));
    crate::linalg::mul(dp.as_ref(), spec.eigenvectors.adjoint())
}
