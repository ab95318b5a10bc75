//! Dense complex linear algebra: Pauli-string operators, states, spectra and
//! expectation values.
//!
//! Everything is dense. Benchmark registers stay at a handful of qubits, where
//! density-matrix products dominate and dense storage is the simplest fit.

mod pauli;
mod spectrum;
mod state;

pub use pauli::{build_operator, Pauli, PauliOperator, PauliTerm, DEFAULT_MAX_QUBITS};
pub use spectrum::{eigendecompose, Spectrum};
pub(crate) use spectrum::hermitian_eigh;
pub use state::{DensityMatrix, PureState};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance on the imaginary part of `Tr[O rho]` for Hermitian `O`.
pub const EXPECTATION_IMAG_TOL: f64 = 1e-9;

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

/// `Tr[A B]` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(())
}

/// Square complex matrix on a qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: CMatrix,
}

impl DenseOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        check_dim(matrix.nrows())?;
        if let Some(z) = matrix.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(if z.re.is_finite() { z.im } else { z.re }));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: CMatrix::identity(dim, dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `max |(O†O - 1)_ij|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let dim = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(dim, dim)))
    }

    /// Spectral norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        if self.is_hermitian(1e-12 * (1.0 + max_abs(&self.matrix))) {
            match eigendecompose(self, 0.0) {
                Ok(s) => s.eigenvalues().iter().fold(0.0, |a, e| a.max(e.abs())),
                Err(_) => self.matrix.clone().svd(false, false).singular_values.max(),
            }
        } else {
            self.matrix.clone().svd(false, false).singular_values.max()
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * C64::new(factor, 0.0),
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &DenseOperator, b: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * C64::new(a, 0.0) + &other.matrix * C64::new(b, 0.0),
        })
    }

    pub fn apply(&self, state: &PureState) -> Result<CVector> {
        if self.dim() != state.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: state.dim(),
            });
        }
        Ok(&self.matrix * state.amplitudes())
    }
}

/// Returns `Re Tr[O rho]`; the imaginary part must vanish for Hermitian `O`.
pub fn expectation(observable: &DenseOperator, rho: &DensityMatrix) -> Result<f64> {
    if observable.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: observable.dim(),
            right: rho.dim(),
        });
    }
    let tol = 1e-10 * (1.0 + max_abs(observable.matrix()));
    let dev = observable.hermitian_deviation();
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    let value = trace_product(observable.matrix(), rho.matrix());
    if value.im.abs() >= EXPECTATION_IMAG_TOL {
        return Err(Error::ComplexEstimate(value.im));
    }
    Ok(value.re)
}
