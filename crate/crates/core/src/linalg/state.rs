use num_complex::Complex64 as C64;

use super::{check_dim, hermitian_deviation, max_abs, trace, CMatrix, CVector};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;
const DENSITY_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(amplitudes / C64::new(norm, 0.0))
    }

    pub(crate) fn from_vector_unchecked(amplitudes: CVector) -> Self {
        Self { amplitudes }
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                left: index,
                right: dim,
            });
        }
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|<self|other>|^2`; insensitive to global phase.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn conj(&self) -> PureState {
        PureState {
            amplitudes: self.amplitudes.map(|z| z.conj()),
        }
    }

    pub fn is_real(&self) -> bool {
        self.amplitudes.iter().all(|z| z.im == 0.0)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Trace-one positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let rho = Self::new_unchecked_psd(matrix)?;
        rho.check_positive()?;
        Ok(rho)
    }

    /// Validates Hermiticity and trace only.
    pub(crate) fn new_unchecked_psd(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        check_dim(matrix.nrows())?;
        let scale = 1.0 + max_abs(&matrix);
        let dev = hermitian_deviation(&matrix);
        if !(dev <= DENSITY_TOL * scale) {
            return Err(Error::NotHermitian(dev));
        }
        let tr = trace(&matrix);
        if !((tr.re - 1.0).abs() <= DENSITY_TOL) || tr.im.abs() > DENSITY_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(state: &PureState) -> Self {
        let v = state.amplitudes();
        Self {
            matrix: v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
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

    pub fn trace(&self) -> C64 {
        trace(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        super::trace_product(&self.matrix, &self.matrix).re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub(crate) fn check_positive(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }
}
