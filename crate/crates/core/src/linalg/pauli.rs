use std::fmt;
use std::ops::Add;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::DenseOperator;
use crate::error::{Error, Result};

/// Largest register materialized by default (dim 4096).
pub const DEFAULT_MAX_QUBITS: usize = 12;

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::PauliLabel(other)),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// 2x2 matrix in the computational basis, |0> first.
    pub fn matrix(self) -> DMatrix<C64> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let e = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
        };
        DMatrix::from_row_slice(2, 2, &e)
    }
}

/// `coefficient * P_0 ⊗ P_1 ⊗ ... ⊗ P_{n-1}`; qubit 0 is the leftmost label
/// and the most significant bit of a basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub paulis: Vec<Pauli>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, string: &str) -> Result<Self> {
        let paulis = string
            .chars()
            .map(Pauli::from_char)
            .collect::<Result<Vec<_>>>()?;
        Self::from_paulis(coefficient, paulis)
    }

    pub fn from_paulis(coefficient: f64, paulis: Vec<Pauli>) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::NonFinite(coefficient));
        }
        Ok(Self {
            coefficient,
            paulis,
        })
    }

    /// Term acting with `pauli` on each listed site and identity elsewhere.
    pub fn on_sites(coefficient: f64, n: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut paulis = vec![Pauli::I; n];
        for &(site, p) in sites {
            if site >= n {
                return Err(Error::StringLength {
                    string: format!("site {site}"),
                    len: site + 1,
                    expected: n,
                });
            }
            paulis[site] = p;
        }
        Self::from_paulis(coefficient, paulis)
    }

    pub fn label(&self) -> String {
        self.paulis.iter().map(|p| p.as_char()).collect()
    }

    pub fn len(&self) -> usize {
        self.paulis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paulis.is_empty()
    }

    fn kron_matrix(&self) -> DMatrix<C64> {
        let mut m = DMatrix::from_element(1, 1, C64::new(self.coefficient, 0.0));
        for p in &self.paulis {
            m = m.kronecker(&p.matrix());
        }
        m
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*{}", self.coefficient, self.label())
    }
}

/// Weighted sum of Pauli strings on a fixed register.
#[derive(Debug, Clone)]
pub struct PauliOperator {
    n: usize,
    terms: Vec<PauliTerm>,
    matrix: OnceLock<DenseOperator>,
}

impl PartialEq for PauliOperator {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.terms == other.terms
    }
}

impl PauliOperator {
    pub fn new(terms: Vec<PauliTerm>, n: usize) -> Result<Self> {
        Self::with_max_qubits(terms, n, DEFAULT_MAX_QUBITS)
    }

    pub fn with_max_qubits(terms: Vec<PauliTerm>, n: usize, max_qubits: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        if n > max_qubits {
            return Err(Error::TooManyQubits { n, max: max_qubits });
        }
        for t in &terms {
            if t.len() != n {
                return Err(Error::StringLength {
                    string: t.label(),
                    len: t.len(),
                    expected: n,
                });
            }
        }
        Ok(Self {
            n,
            terms,
            matrix: OnceLock::new(),
        })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Dense matrix, built once on first use.
    pub fn matrix(&self) -> &DenseOperator {
        self.matrix.get_or_init(|| {
            let dim = self.dim();
            let mut m = DMatrix::zeros(dim, dim);
            for t in &self.terms {
                m += t.kron_matrix();
            }
            DenseOperator::from_matrix_unchecked(m)
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| PauliTerm {
                coefficient: t.coefficient * factor,
                paulis: t.paulis.clone(),
            })
            .collect();
        Self {
            n: self.n,
            terms,
            matrix: OnceLock::new(),
        }
    }
}

impl Add for &PauliOperator {
    type Output = Result<PauliOperator>;

    fn add(self, rhs: &PauliOperator) -> Result<PauliOperator> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: rhs.dim(),
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        PauliOperator::new(terms, self.n)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Builds the operator `Σ_k c_k ⊗_j σ^{(k,j)}` on `n` qubits.
pub fn build_operator(terms: Vec<PauliTerm>, n: usize) -> Result<PauliOperator> {
    PauliOperator::new(terms, n)
}
