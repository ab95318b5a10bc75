//! Benchmark models and observables.
//!
//! Sign convention: `σ^z |0> = +|0>`, qubit 0 is site 1 and the most
//! significant bit of a basis index.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, DenseOperator, Pauli, PauliOperator, PauliTerm, PureState, Spectrum};

/// Ising chain with transverse driver `H0 = Σ σ^x_j` and target
/// `HT = hz Σ σ^z_j - J Σ σ^z_j σ^z_{j+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingSpec {
    pub n: usize,
    pub hz: f64,
    pub coupling: f64,
    pub periodic: bool,
}

impl IsingSpec {
    /// Open chain with `hz = 0.2`, `J = 1`.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            hz: 0.2,
            coupling: 1.0,
            periodic: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("Ising chain needs n >= 2, got {}", self.n)));
        }
        for v in [self.hz, self.coupling] {
            if !v.is_finite() {
                return Err(Error::NonFinite(v));
            }
        }
        Ok(())
    }

    fn bonds(&self) -> Vec<(usize, usize)> {
        let mut b: Vec<_> = (0..self.n - 1).map(|j| (j, j + 1)).collect();
        if self.periodic && self.n > 2 {
            b.push((self.n - 1, 0));
        }
        b
    }

    /// Classical energy of a computational basis state.
    pub fn classical_energy(&self, index: usize) -> f64 {
        let z = |j: usize| {
            if (index >> (self.n - 1 - j)) & 1 == 0 {
                1.0
            } else {
                -1.0
            }
        };
        let field: f64 = (0..self.n).map(z).sum();
        let bonds: f64 = self.bonds().iter().map(|&(a, b)| z(a) * z(b)).sum();
        self.hz * field - self.coupling * bonds
    }
}

/// Named model or explicit Hamiltonian pair.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    IsingLz(IsingSpec),
    Custom { h0: PauliOperator, ht: PauliOperator },
}

impl ModelSpec {
    pub fn qubits(&self) -> usize {
        match self {
            ModelSpec::IsingLz(s) => s.n,
            ModelSpec::Custom { h0, .. } => h0.qubits(),
        }
    }

    /// Hamiltonian pair plus, where known analytically, the ground state of H0.
    pub fn build(&self) -> Result<(PauliOperator, PauliOperator, Option<PureState>)> {
        match self {
            ModelSpec::IsingLz(spec) => {
                let (h0, ht) = ising_pair(spec)?;
                Ok((h0, ht, Some(transverse_ground_state(spec.n)?)))
            }
            ModelSpec::Custom { h0, ht } => {
                if h0.qubits() != ht.qubits() {
                    return Err(Error::DimensionMismatch {
                        left: h0.dim(),
                        right: ht.dim(),
                    });
                }
                Ok((h0.clone(), ht.clone(), None))
            }
        }
    }
}

/// `(H0, HT)` for the Ising sweep.
pub fn ising_pair(spec: &IsingSpec) -> Result<(PauliOperator, PauliOperator)> {
    spec.validate()?;
    let n = spec.n;
    let h0_terms = (0..n)
        .map(|j| PauliTerm::on_sites(1.0, n, &[(j, Pauli::X)]))
        .collect::<Result<Vec<_>>>()?;
    let mut ht_terms = (0..n)
        .map(|j| PauliTerm::on_sites(spec.hz, n, &[(j, Pauli::Z)]))
        .collect::<Result<Vec<_>>>()?;
    for (a, b) in spec.bonds() {
        ht_terms.push(PauliTerm::on_sites(-spec.coupling, n, &[(a, Pauli::Z), (b, Pauli::Z)])?);
    }
    Ok((PauliOperator::new(h0_terms, n)?, PauliOperator::new(ht_terms, n)?))
}

/// `|->^{⊗n}`, the ground state of `Σ σ^x_j` with energy `-n`.
pub fn transverse_ground_state(n: usize) -> Result<PureState> {
    let dim = 1usize << n;
    let amp = (dim as f64).sqrt().recip();
    let v = CVector::from_iterator(
        dim,
        (0..dim).map(|i| {
            let sign = if i.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(sign * amp, 0.0)
        }),
    );
    PureState::new(v)
}

/// `O = 1 - 2|E_0><E_0|`.
pub fn reflection_observable(spectrum: &Spectrum) -> Result<DenseOperator> {
    spectrum.require_nondegenerate_ground()?;
    let dim = spectrum.dim();
    let g = spectrum.eigenvectors().column(0);
    let m = CMatrix::identity(dim, dim) - (g * g.adjoint()) * C64::new(2.0, 0.0);
    DenseOperator::new(m)
}

/// `M = Σ_i σ^z_i`.
pub fn magnetization(n: usize) -> Result<PauliOperator> {
    let terms = (0..n)
        .map(|j| PauliTerm::on_sites(1.0, n, &[(j, Pauli::Z)]))
        .collect::<Result<Vec<_>>>()?;
    PauliOperator::new(terms, n)
}
