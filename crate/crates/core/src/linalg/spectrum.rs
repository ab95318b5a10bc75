use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::{max_abs, CMatrix, CVector, DenseOperator, PureState};
use crate::error::{Error, Result};

/// Relative tolerance used when none is given: `1e-9 * ||H||`.
pub const DEFAULT_RELATIVE_DEGENERACY_TOL: f64 = 1e-9;

/// Ascending eigenvalues and orthonormal eigenvectors of a Hermitian operator.
///
/// Eigenvalues closer than `degeneracy_tol` to their neighbour are grouped
/// into one block; blocks are contiguous index ranges.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    degeneracy_tol: f64,
    blocks: Vec<Range<usize>>,
    block_of: Vec<usize>,
}

/// Hermitian eigendecomposition (unsorted). Real-symmetric input takes the
/// real solver.
pub(crate) fn hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    if m.iter().all(|z| z.im == 0.0) {
        let real = m.map(|z| z.re);
        let eig = SymmetricEigen::new(real);
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let eig = SymmetricEigen::new(m.clone());
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }
}

/// Eigendecomposition of a Hermitian operator; `degeneracy_tol <= 0` selects
/// the default `1e-9 * ||H||`.
pub fn eigendecompose(op: &DenseOperator, degeneracy_tol: f64) -> Result<Spectrum> {
    let m = op.matrix();
    let scale = 1.0 + max_abs(m);
    let dev = op.hermitian_deviation();
    if dev > 1e-10 * scale {
        return Err(Error::NotHermitian(dev));
    }
    // Symmetrize so the solver sees an exactly Hermitian matrix.
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let (values, vectors) = hermitian_eigh(&sym);

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let dim = eigenvalues.len();
    let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| vectors[(r, order[c])]);

    let norm = eigenvalues.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
    let tol = if degeneracy_tol > 0.0 {
        degeneracy_tol
    } else {
        DEFAULT_RELATIVE_DEGENERACY_TOL * norm
    };
    Ok(Spectrum::assemble(eigenvalues, eigenvectors, tol))
}

impl Spectrum {
    fn assemble(eigenvalues: Vec<f64>, eigenvectors: CMatrix, degeneracy_tol: f64) -> Self {
        let mut blocks = Vec::new();
        let mut block_of = vec![0; eigenvalues.len()];
        let mut start = 0;
        for i in 1..=eigenvalues.len() {
            if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] > degeneracy_tol {
                for b in block_of.iter_mut().take(i).skip(start) {
                    *b = blocks.len();
                }
                blocks.push(start..i);
                start = i;
            }
        }
        Self {
            eigenvalues,
            eigenvectors,
            degeneracy_tol,
            blocks,
            block_of,
        }
    }

    /// Spectrum of an operator that is diagonal in the computational basis.
    pub fn of_diagonal(diagonal: &[f64], degeneracy_tol: f64) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            diagonal.len(),
            diagonal.iter().map(|&d| C64::new(d, 0.0)),
        ));
        eigendecompose(&DenseOperator::new(m)?, degeneracy_tol)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns are the eigenvectors `|E_j>`.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `E_1 - E_0`.
    pub fn ground_gap(&self) -> f64 {
        self.eigenvalues[1] - self.eigenvalues[0]
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    pub fn same_block(&self, j: usize, k: usize) -> bool {
        self.block_of[j] == self.block_of[k]
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.blocks.len() == self.dim()
    }

    pub fn ground_is_degenerate(&self) -> bool {
        self.blocks[0].len() > 1
    }

    pub fn require_nondegenerate_ground(&self) -> Result<()> {
        if self.ground_is_degenerate() {
            return Err(Error::DegenerateGround {
                gap: self.ground_gap(),
            });
        }
        Ok(())
    }

    pub fn eigenvector(&self, j: usize) -> PureState {
        PureState::from_vector_unchecked(self.eigenvectors.column(j).into_owned())
    }

    pub fn ground_state(&self) -> PureState {
        self.eigenvector(0)
    }

    /// Eigenbasis representation `V† A V`.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * a * &self.eigenvectors
    }

    /// Computational-basis representation `V A V†`.
    pub fn from_eigenbasis(&self, a: &CMatrix) -> CMatrix {
        &self.eigenvectors * a * self.eigenvectors.adjoint()
    }

    /// Coefficients `<E_j|psi>`.
    pub fn coefficients(&self, state: &PureState) -> Result<CVector> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: state.dim(),
                right: self.dim(),
            });
        }
        Ok(self.eigenvectors.adjoint() * state.amplitudes())
    }

    /// `V diag(E) V†`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = CVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&e| C64::new(e, 0.0)),
        );
        self.from_eigenbasis(&CMatrix::from_diagonal(&d))
    }

    /// `exp(-i H t)` in the computational basis.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let d = CVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&e| C64::from_polar(1.0, -e * t)),
        );
        self.from_eigenbasis(&CMatrix::from_diagonal(&d))
    }
}
