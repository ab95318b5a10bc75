use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Pauli string `{string}` has length {len}, expected {expected}")]
    StringLength {
        string: String,
        len: usize,
        expected: usize,
    },
    #[error("invalid Pauli label `{0}`")]
    PauliLabel(char),
    #[error("register of {n} qubits exceeds the configured maximum of {max}")]
    TooManyQubits { n: usize, max: usize },
    #[error("operator needs at least one qubit")]
    EmptyRegister,
    #[error("non-finite coefficient {0}")]
    NonFinite(f64),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("density matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("interpolation parameter s = {0} outside [0, 1]")]
    ScheduleParameter(f64),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("invalid sweep parameters: {0}")]
    Sweep(String),
    #[error("initial state is not the ground state of H0 (energy {energy}, ground energy {ground})")]
    NotGroundState { energy: f64, ground: f64 },
    #[error("integrator produced non-finite amplitudes at step {0}; reduce dt")]
    Integrator(usize),
    #[error(
        "ground space is degenerate (E1 - E0 = {gap:e}); use block-wise (degenerate) dephasing"
    )]
    DegenerateGround { gap: f64 },
    #[error("spectrum has degenerate levels; use degenerate_dephase for block-diagonal projection")]
    DegenerateSpectrum,
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("quadrature did not converge: estimated error {error:e} after {intervals} intervals")]
    Quadrature { error: f64, intervals: usize },
    #[error("rejection sampler gave up after {0} consecutive rejections")]
    Sampler(usize),
    #[error("argument out of range: {0}")]
    Domain(String),
    #[error("estimator denominator {denominator:e} below floor (eps = {epsilon:e}, delta = {delta:e})")]
    VanishingDenominator {
        denominator: f64,
        epsilon: f64,
        delta: f64,
    },
    #[error("bound requires eps < sqrt(3/2) - 1, got eps = {0}")]
    BoundValidity(f64),
    #[error("state has no ground-state support (eps = 1)")]
    NoGroundSupport,
    #[error("state still has ground-state coherences of size {0:e}; dephase it first")]
    NotDephased(f64),
    #[error("observable is not unitary (deviation {0:e}); evaluate it at the expectation level")]
    NotUnitary(f64),
    #[error("estimator produced complex value with imaginary part {0:e}")]
    ComplexEstimate(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
