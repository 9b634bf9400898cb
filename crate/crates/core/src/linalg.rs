//! Dense complex matrix helpers and the two validated operator newtypes.

use faer::linalg::matmul::matmul;
use faer::traits::Conjugate;
use faer::{Accum, Mat, MatMut, MatRef, Par};

use crate::error::{QocError, Result};

pub use faer::c64;

/// Dense complex matrix, column-major.
pub type CMat = Mat<c64>;

const ONE: c64 = c64 { re: 1.0, im: 0.0 };

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    Mat::zeros(n, n)
}

/// `a * b` as a new matrix (either operand may be a conjugated view).
pub fn mul<L, R>(a: MatRef<'_, L>, b: MatRef<'_, R>) -> CMat
where
    L: Conjugate<Canonical = c64>,
    R: Conjugate<Canonical = c64>,
{
    let mut out = Mat::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, ONE, Par::Seq);
    out
}

/// `dst = a * b`.
pub fn mul_into<L, R>(dst: MatMut<'_, c64>, a: MatRef<'_, L>, b: MatRef<'_, R>)
where
    L: Conjugate<Canonical = c64>,
    R: Conjugate<Canonical = c64>,
{
    matmul(dst, Accum::Replace, a, b, ONE, Par::Seq);
}

pub fn adjoint(a: MatRef<'_, c64>) -> CMat {
    a.adjoint().to_owned()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn frobenius(a: MatRef<'_, c64>) -> f64 {
    a.norm_l2()
}

/// Frobenius distance `‖a − b‖_F`.
pub fn distance(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    (a - b).norm_l2()
}

pub fn commutator(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    mul(a, b) - mul(b, a)
}

pub fn trace(a: MatRef<'_, c64>) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// `‖U†U − I‖_F`.
pub fn unitarity_error(u: MatRef<'_, c64>) -> f64 {
    let mut g = Mat::zeros(u.ncols(), u.ncols());
    matmul(g.as_mut(), Accum::Replace, u.adjoint(), u, ONE, Par::Seq);
    (g - identity(u.ncols())).norm_l2()
}

/// Multiply row `r` of `m` by `factors[r]`.
pub fn scale_rows(mut m: MatMut<'_, c64>, factors: &[c64]) {
    for j in 0..m.ncols() {
        for (r, f) in factors.iter().enumerate() {
            m[(r, j)] *= *f;
        }
    }
}

/// Multiply column `c` of `m` by `factors[c]`.
pub fn scale_cols(mut m: MatMut<'_, c64>, factors: &[c64]) {
    for (j, f) in factors.iter().enumerate() {
        for r in 0..m.nrows() {
            m[(r, j)] *= *f;
        }
    }
}

/// `Σ_r w_r (x r)_{rr}` without forming the product.
pub fn weighted_diag_of_product(x: MatRef<'_, c64>, r: MatRef<'_, c64>, weights: &[f64]) -> c64 {
    let n = weights.len();
    let mut acc = c64::new(0.0, 0.0);
    for (k, w) in weights.iter().enumerate() {
        let rcol = r.col(k);
        let mut s = c64::new(0.0, 0.0);
        for l in 0..n {
            s += x[(k, l)] * rcol[l];
        }
        acc += s * *w;
    }
    acc
}

/// `e^{-i λ t}` for each eigenvalue.
pub fn phases(eigenvalues: &[f64], t: f64) -> Vec<c64> {
    eigenvalues.iter().map(|&l| c64::cis(-l * t)).collect()
}

/// Relative Hermiticity defect `‖H − H†‖_F / max(‖H‖_F, 1)`.
pub fn hermiticity_error(h: MatRef<'_, c64>) -> f64 {
    let dev = (h - h.adjoint()).norm_l2();
    dev / h.norm_l2().max(f64::MIN_POSITIVE)
}

/// A dense Hermitian matrix (energies in rad/s with ħ = 1).
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: CMat,
}

impl HermitianOperator {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(QocError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let deviation = if matrix.norm_l2() == 0.0 {
            0.0
        } else {
            hermiticity_error(matrix.as_ref())
        };
        if deviation > Self::TOLERANCE {
            return Err(QocError::NotHermitian { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: zeros(dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &HermitianOperator, s: f64) -> HermitianOperator {
        let matrix = Mat::from_fn(self.dim(), self.dim(), |i, j| {
            self.matrix[(i, j)] + other.matrix[(i, j)] * s
        });
        HermitianOperator { matrix }
    }

    pub fn scaled(&self, s: f64) -> HermitianOperator {
        HermitianOperator {
            matrix: Mat::from_fn(self.dim(), self.dim(), |i, j| self.matrix[(i, j)] * s),
        }
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        self.matrix
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map(|v| v.iter().fold(0.0f64, |m, x| m.max(x.abs())))
            .unwrap_or(f64::NAN)
    }
}

/// A unitary target gate `W`.
#[derive(Clone, Debug)]
pub struct TargetGate {
    matrix: CMat,
}

impl TargetGate {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(QocError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let deviation = unitarity_error(matrix.as_ref());
        if deviation > Self::TOLERANCE {
            return Err(QocError::NotUnitary { deviation });
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, c64> {
        self.matrix.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_x() -> CMat {
        Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { c64::new(0.0, 0.0) })
    }

    #[test]
    fn kron_with_identity_places_blocks() {
        let k = kron(identity(2).as_ref(), pauli_x().as_ref());
        assert_eq!(k.nrows(), 4);
        assert_eq!(k[(0, 1)], ONE);
        assert_eq!(k[(2, 3)], ONE);
        assert_eq!(k[(0, 2)], c64::new(0.0, 0.0));
    }

    #[test]
    fn weighted_diag_matches_explicit_product() {
        let x = Mat::from_fn(3, 3, |i, j| c64::new(i as f64 + 0.5, j as f64 - 1.0));
        let r = Mat::from_fn(3, 3, |i, j| c64::new((i * j) as f64, 0.25 * i as f64));
        let w = [1.0, -2.0, 0.5];
        let p = mul(x.as_ref(), r.as_ref());
        let expected: c64 = (0..3).map(|k| p[(k, k)] * w[k]).sum();
        let got = weighted_diag_of_product(x.as_ref(), r.as_ref(), &w);
        assert!((got - expected).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Mat::from_fn(2, 2, |i, j| c64::new((i + 2 * j) as f64, 0.0));
        assert!(matches!(
            HermitianOperator::new(m),
            Err(QocError::NotHermitian { .. })
        ));
    }

    #[test]
    fn rejects_non_unitary_target() {
        let m = identity(2) * faer::Scale(c64::new(2.0, 0.0));
        assert!(TargetGate::new(m).is_err());
    }
}
