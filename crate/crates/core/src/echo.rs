//! Echo-verified estimators.
//!
//! The adiabatic echo runs a forward sweep, a dephasing step, a controlled
//! observable, a second dephasing step and the backward sweep, then checks
//! for return to the initial state. Everything here is evaluated in the
//! target-Hamiltonian eigenbasis, where both dephasing steps are entrywise
//! products.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::adiabatic::{evolve_backward_adjoint, evolve_forward, infidelity, AdiabaticProblem, Integrator};
use crate::dephasing::{fourier_matrix, FourierMatrix, RandomTimeDistribution};
use crate::error::{Error, Result};
use crate::linalg::{trace, trace_product, CMatrix, DenseOperator, DensityMatrix, PureState, Spectrum};

/// Below this `|Tr[ρ̃σ̃]|` the ratio estimator is not evaluated.
pub const DENOMINATOR_FLOOR: f64 = 1e-10;

/// Largest imaginary part tolerated for Hermitian observables when the
/// estimator is expected to be real.
pub const IMAG_TOL: f64 = 1e-8;

/// `ε` must stay below `√(3/2) - 1` for the error bound to hold.
pub fn bound_validity_limit() -> f64 {
    1.5f64.sqrt() - 1.0
}

/// Value and diagnostics of one estimator evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub value: f64,
    /// `Tr[O ρ̃ σ̃]` (for the plain estimate: `<ψ|O|ψ>`).
    pub numerator: C64,
    /// `Tr[ρ̃ σ̃]` (for the plain estimate: 1).
    pub denominator: C64,
    pub epsilon_forward: f64,
    pub epsilon_backward: f64,
    pub delta: f64,
    pub gamma: Option<f64>,
    pub bound: Option<f64>,
    /// `<E_0|O|E_0>`.
    pub exact_reference: Option<f64>,
    /// `Im(numerator / denominator)`.
    pub imag_residual: f64,
}

impl EstimatorResult {
    pub fn error(&self) -> Option<f64> {
        self.exact_reference.map(|r| self.value - r)
    }
}

/// `Tr[O ρ^k] / Tr[ρ^k]`.
pub fn purified_estimator(rho: &DensityMatrix, observable: &DenseOperator, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("purification degree must be >= 1".into()));
    }
    if rho.dim() != observable.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: observable.dim(),
        });
    }
    let (values, vectors) = crate::linalg::hermitian_eigh(rho.matrix());
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for (j, &lambda) in values.iter().enumerate() {
        let w = lambda.powi(k as i32);
        let v = vectors.column(j);
        let ov = observable.matrix() * v;
        num += v.dotc(&ov) * w;
        den += w;
    }
    if den.abs() <= DENOMINATOR_FLOOR {
        return Err(Error::VanishingDenominator {
            denominator: den,
            epsilon: f64::NAN,
            delta: f64::NAN,
        });
    }
    Ok(num.re / den)
}

/// Weight `γ = [1 + c_0^k / (ε^k Tr[ρ_⊥^k])]^{-1}` of the excited-state part
/// of a dephased state after degree-`k` purification.
pub fn gamma(rho_d: &DensityMatrix, spectrum: &Spectrum, k: u32) -> Result<f64> {
    if rho_d.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            left: rho_d.dim(),
            right: spectrum.dim(),
        });
    }
    spectrum.require_nondegenerate_ground()?;
    let r = spectrum.to_eigenbasis(rho_d.matrix());
    let coherence = (1..r.nrows()).map(|j| r[(0, j)].norm()).fold(0.0, f64::max);
    if coherence > 1e-8 {
        return Err(Error::NotDephased(coherence));
    }
    let c0 = r[(0, 0)].re;
    let eps = 1.0 - c0;
    if c0 <= 0.0 {
        return Err(Error::NoGroundSupport);
    }
    if eps <= 0.0 {
        return Ok(0.0);
    }
    // ρ_⊥: excited block normalized to unit trace.
    let n = r.nrows() - 1;
    let perp = r.view((1, 1), (n, n)).into_owned() / C64::new(eps, 0.0);
    let (values, _) = crate::linalg::hermitian_eigh(&perp);
    let tr_k: f64 = values.iter().map(|l| l.max(0.0).powi(k as i32)).sum();
    if tr_k <= 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (1.0 + c0.powi(k as i32) / (eps.powi(k as i32) * tr_k)))
}

/// `ρ̃ = F ∘ ρ` and `σ̃ = F* ∘ σ`, both in the eigenbasis.
///
/// With these, `Tr[O ρ̃ σ̃] = Tr{σ D[O D[ρ]]}` for the channel `D` with
/// pattern `F`.
pub fn build_tilde_pair(
    rho_ad: &DensityMatrix,
    sigma_ad: &DensityMatrix,
    f: &FourierMatrix,
    spectrum: &Spectrum,
) -> Result<(DenseOperator, DenseOperator)> {
    for d in [rho_ad.dim(), sigma_ad.dim(), f.dim()] {
        if d != spectrum.dim() {
            return Err(Error::DimensionMismatch {
                left: d,
                right: spectrum.dim(),
            });
        }
    }
    let rho = f.hadamard(&spectrum.to_eigenbasis(rho_ad.matrix()));
    let sigma = f
        .entries()
        .map(|z| z.conj())
        .component_mul(&spectrum.to_eigenbasis(sigma_ad.matrix()));
    Ok((DenseOperator::new(rho)?, DenseOperator::new(sigma)?))
}

/// Worst-case estimator error
/// `2‖O‖[(1-ε)^{1/2} ε^{1/2} δ + ε(1-ε)δ² + ε²] / |(1-ε)² - 2ε(1-ε) - ε²|`.
pub fn error_bound(epsilon: f64, delta: f64, operator_norm: f64) -> Result<f64> {
    if !(0.0..bound_validity_limit()).contains(&epsilon) {
        return Err(Error::BoundValidity(epsilon));
    }
    if !(-1e-12..=1.0 + 1e-12).contains(&delta) {
        return Err(Error::Domain(format!("delta must lie in [0, 1], got {delta}")));
    }
    let delta = delta.clamp(0.0, 1.0);
    let e = epsilon;
    let num = (1.0 - e).sqrt() * e.sqrt() * delta + e * (1.0 - e) * delta * delta + e * e;
    let den = ((1.0 - e).powi(2) - 2.0 * e * (1.0 - e) - e * e).abs();
    Ok(2.0 * operator_norm * num / den)
}

/// Observable expressed in the target eigenbasis, with the cached reference
/// value `<E_0|O|E_0>` and operator norm.
#[derive(Debug, Clone)]
pub struct EigenObservable {
    eig: CMatrix,
    norm: f64,
    ground_value: f64,
    unitarity_deviation: f64,
}

impl EigenObservable {
    pub fn new(observable: &DenseOperator, spectrum: &Spectrum) -> Result<Self> {
        if observable.dim() != spectrum.dim() {
            return Err(Error::DimensionMismatch {
                left: observable.dim(),
                right: spectrum.dim(),
            });
        }
        let dev = observable.hermitian_deviation();
        if dev > 1e-10 * (1.0 + crate::linalg::max_abs(observable.matrix())) {
            return Err(Error::NotHermitian(dev));
        }
        spectrum.require_nondegenerate_ground()?;
        let eig = spectrum.to_eigenbasis(observable.matrix());
        Ok(Self {
            ground_value: eig[(0, 0)].re,
            norm: observable.operator_norm(),
            unitarity_deviation: observable.unitarity_deviation(),
            eig,
        })
    }

    pub fn ground_value(&self) -> f64 {
        self.ground_value
    }

    pub fn operator_norm(&self) -> f64 {
        self.norm
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation <= 1e-9
    }

    pub fn eigenbasis_matrix(&self) -> &CMatrix {
        &self.eig
    }
}

/// Forward state `|ψ_ad> = U_→|ψ_0>` and echo state `|φ> = U_←†|ψ_0>`
/// (`σ_ad = |φ><φ|`) in the computational basis, with the sweep
/// infidelities.
#[derive(Debug, Clone)]
pub struct SweepPair {
    pub forward: PureState,
    pub echo: PureState,
    pub epsilon_forward: f64,
    pub epsilon_backward: f64,
}

/// Runs the sweeps needed by the echo estimator.
///
/// When the Hamiltonians and the initial state are real, `U_←† = conj(U_→)`
/// step by step, so the echo state is the complex conjugate of the forward
/// state and a single sweep suffices.
pub fn prepare_sweeps(problem: &AdiabaticProblem) -> Result<SweepPair> {
    let fwd = evolve_forward(problem)?;
    let echo = if problem.is_time_reversal_symmetric() && problem.integrator() == Integrator::Midpoint {
        fwd.final_state.conj()
    } else {
        evolve_backward_adjoint(problem, problem.initial_state())?
    };
    let spectrum = problem.target_spectrum();
    let epsilon_backward = infidelity(&echo, spectrum)?;
    Ok(SweepPair {
        forward: fwd.final_state,
        echo,
        epsilon_forward: fwd.infidelity,
        epsilon_backward,
    })
}

/// Intermediate traces shared by the estimator and the shot model.
#[derive(Debug, Clone, Copy)]
struct EchoTraces {
    /// `Tr[ρ̃σ̃]`
    g00: C64,
    /// `Tr[O ρ̃ σ̃]`
    g10: C64,
}

fn eigen_density(state: &PureState, spectrum: &Spectrum) -> Result<CMatrix> {
    let c = spectrum.coefficients(state)?;
    Ok(&c * c.adjoint())
}

fn tilde_matrices(pair: &SweepPair, f: &FourierMatrix, spectrum: &Spectrum) -> Result<(CMatrix, CMatrix)> {
    if f.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            left: f.dim(),
            right: spectrum.dim(),
        });
    }
    let rho = f.hadamard(&eigen_density(&pair.forward, spectrum)?);
    let sigma = f
        .entries()
        .map(|z| z.conj())
        .component_mul(&eigen_density(&pair.echo, spectrum)?);
    Ok((rho, sigma))
}

fn echo_traces(rho_t: &CMatrix, sigma_t: &CMatrix, obs: &EigenObservable) -> EchoTraces {
    let rs = rho_t * sigma_t;
    EchoTraces {
        g00: trace(&rs),
        g10: trace_product(&obs.eig, &rs),
    }
}

/// Echo-verified estimate from precomputed sweeps and Fourier entries.
///
/// The value is `Re(Tr[O ρ̃ σ̃] / Tr[ρ̃ σ̃])`; the imaginary part is kept in
/// `imag_residual`. With a projection pattern (ideal dephasing) the
/// imaginary part must vanish.
pub fn aev_from_sweeps(
    pair: &SweepPair,
    f: &FourierMatrix,
    spectrum: &Spectrum,
    observable: &EigenObservable,
) -> Result<EstimatorResult> {
    let (rho_t, sigma_t) = tilde_matrices(pair, f, spectrum)?;
    let t = echo_traces(&rho_t, &sigma_t, observable);
    let epsilon = pair.epsilon_forward.max(pair.epsilon_backward);
    let delta = f.delta();
    if t.g00.norm() <= DENOMINATOR_FLOOR {
        return Err(Error::VanishingDenominator {
            denominator: t.g00.norm(),
            epsilon,
            delta,
        });
    }
    let ratio = t.g10 / t.g00;
    let ideal = delta == 0.0 && f.entries().iter().all(|z| z.im == 0.0);
    if ideal && ratio.im.abs() >= IMAG_TOL {
        return Err(Error::ComplexEstimate(ratio.im));
    }
    // Excited-state weight after degree-2 purification of the dephased
    // forward state.
    let weights: Vec<f64> = rho_t_diag(pair, spectrum)?;
    let gamma = gamma_from_weights(&weights, 2);
    let bound = error_bound(epsilon, delta, observable.norm).ok();
    Ok(EstimatorResult {
        value: ratio.re,
        numerator: t.g10,
        denominator: t.g00,
        epsilon_forward: pair.epsilon_forward,
        epsilon_backward: pair.epsilon_backward,
        delta,
        gamma,
        bound,
        exact_reference: Some(observable.ground_value),
        imag_residual: ratio.im,
    })
}

fn rho_t_diag(pair: &SweepPair, spectrum: &Spectrum) -> Result<Vec<f64>> {
    let c = spectrum.coefficients(&pair.forward)?;
    Ok(c.iter().map(|z| z.norm_sqr()).collect())
}

fn gamma_from_weights(weights: &[f64], k: i32) -> Option<f64> {
    let c0 = weights[0];
    let eps: f64 = weights[1..].iter().sum();
    if c0 <= 0.0 {
        return None;
    }
    if eps <= 0.0 {
        return Some(0.0);
    }
    let tr_k: f64 = weights[1..].iter().map(|w| (w / eps).powi(k)).sum();
    Some(1.0 / (1.0 + c0.powi(k) / (eps.powi(k) * tr_k)))
}

/// Runs the sweeps, builds the Fourier entries and evaluates the echo
/// estimator.
pub fn aev_estimate(
    problem: &AdiabaticProblem,
    dist: &RandomTimeDistribution,
    observable: &DenseOperator,
) -> Result<EstimatorResult> {
    let spectrum = problem.target_spectrum();
    let obs = EigenObservable::new(observable, spectrum)?;
    let pair = prepare_sweeps(problem)?;
    let f = fourier_matrix(dist, spectrum)?;
    aev_from_sweeps(&pair, &f, spectrum, &obs)
}

/// Plain adiabatic estimate `<ψ_ad|O|ψ_ad>` for an already-swept state.
pub fn qaa_from_state(
    state: &PureState,
    epsilon: f64,
    spectrum: &Spectrum,
    observable: &EigenObservable,
) -> Result<EstimatorResult> {
    let c = spectrum.coefficients(state)?;
    // Normalize away the integrator's residual norm drift.
    let v = c.dotc(&(&observable.eig * &c)) / c.norm_squared();
    if v.im.abs() >= IMAG_TOL {
        return Err(Error::ComplexEstimate(v.im));
    }
    Ok(EstimatorResult {
        value: v.re,
        numerator: v,
        denominator: C64::new(1.0, 0.0),
        epsilon_forward: epsilon,
        epsilon_backward: f64::NAN,
        delta: f64::NAN,
        gamma: None,
        bound: None,
        exact_reference: Some(observable.ground_value),
        imag_residual: v.im,
    })
}

/// Forward sweep followed by a direct measurement of `O`.
pub fn qaa_estimate(problem: &AdiabaticProblem, observable: &DenseOperator) -> Result<EstimatorResult> {
    let spectrum = problem.target_spectrum();
    let obs = EigenObservable::new(observable, spectrum)?;
    let fwd = evolve_forward(problem)?;
    qaa_from_state(&fwd.final_state, fwd.infidelity, spectrum, &obs)
}

/// Measurement setting of the simulated circuits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    /// Hadamard test, control measured in X.
    X,
    /// Hadamard test, control measured in Y.
    Y,
    /// Echo circuit (observable replaced by the identity).
    Echo,
}

/// Outcome counts of one circuit setting. Outcome `0` means the system did
/// not return to the initial state; for the echo circuit `plus` counts
/// returns and `minus` is always zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub basis: Basis,
    pub shots: u64,
    pub plus: u64,
    pub minus: u64,
    pub zero: u64,
    /// Exact probabilities of `(+1, -1, 0)`.
    pub probabilities: [f64; 3],
}

impl ShotRecord {
    pub fn frequencies(&self) -> [f64; 3] {
        let n = self.shots as f64;
        [self.plus as f64 / n, self.minus as f64 / n, self.zero as f64 / n]
    }

    /// Sample mean of the outcome value (`+1`, `-1`, `0`).
    pub fn mean(&self) -> f64 {
        (self.plus as f64 - self.minus as f64) / self.shots as f64
    }

    /// Sample variance of the mean.
    pub fn mean_variance(&self) -> f64 {
        let n = self.shots as f64;
        let m = self.mean();
        let second = (self.plus + self.minus) as f64 / n;
        (second - m * m).max(0.0) / n
    }
}

/// Shot-level simulation of the Hadamard-test and echo circuits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotSimulation {
    pub x: ShotRecord,
    pub y: ShotRecord,
    pub echo: ShotRecord,
    /// `mean(X) / mean(Echo)`.
    pub value: f64,
    /// Delta-method standard error of `value`.
    pub std_error: f64,
    /// `mean(Y) / mean(Echo)`.
    pub imag_value: f64,
    /// Expectation-level result the sampled value converges to.
    pub expected: EstimatorResult,
}

/// Exact outcome probabilities `(+1, -1, 0)` of the three circuits.
///
/// With `G00 = Tr[ρ̃σ̃]`, `G10 = Tr[Oρ̃σ̃]` and `G11 = Tr{σ D[O D[ρ] O†]}`:
/// X: `P(±) = (G00 + G11 ± 2 Re G10) / 4`; Y: the same with `Im G10`;
/// both `P(0) = 1 - (G00 + G11) / 2`; echo: `P(return) = G00`.
pub fn outcome_probabilities(
    pair: &SweepPair,
    f: &FourierMatrix,
    spectrum: &Spectrum,
    observable: &EigenObservable,
) -> Result<[[f64; 3]; 3]> {
    let (rho_t, sigma_t) = tilde_matrices(pair, f, spectrum)?;
    let t = echo_traces(&rho_t, &sigma_t, observable);
    let o = &observable.eig;
    let inner = f.hadamard(&(o * &rho_t * o.adjoint()));
    let sigma = eigen_density(&pair.echo, spectrum)?;
    let g11 = trace_product(&sigma, &inner).re;
    let g00 = t.g00.re;
    let fail = 1.0 - 0.5 * (g00 + g11);
    let x = [
        0.25 * (g00 + g11 + 2.0 * t.g10.re),
        0.25 * (g00 + g11 - 2.0 * t.g10.re),
        fail,
    ];
    let y = [
        0.25 * (g00 + g11 + 2.0 * t.g10.im),
        0.25 * (g00 + g11 - 2.0 * t.g10.im),
        fail,
    ];
    let echo = [g00, 0.0, 1.0 - g00];
    Ok([x, y, echo])
}

fn draw(basis: Basis, probs: [f64; 3], shots: u64, rng: &mut ChaCha8Rng) -> Result<ShotRecord> {
    let p = probs.map(|q| q.clamp(0.0, 1.0));
    let binom = |n: u64, q: f64, rng: &mut ChaCha8Rng| -> Result<u64> {
        if n == 0 || q <= 0.0 {
            return Ok(0);
        }
        if q >= 1.0 {
            return Ok(n);
        }
        Binomial::new(n, q)
            .map(|b| b.sample(rng))
            .map_err(|e| Error::Domain(format!("binomial({n}, {q}): {e}")))
    };
    let plus = binom(shots, p[0], rng)?;
    let rest = 1.0 - p[0];
    let q_minus = if rest > 0.0 { (p[1] / rest).min(1.0) } else { 0.0 };
    let minus = binom(shots - plus, q_minus, rng)?;
    Ok(ShotRecord {
        basis,
        shots,
        plus,
        minus,
        zero: shots - plus - minus,
        probabilities: probs,
    })
}

/// Samples `shots` runs of each circuit setting from precomputed sweeps.
pub fn shots_from_sweeps(
    pair: &SweepPair,
    f: &FourierMatrix,
    spectrum: &Spectrum,
    observable: &EigenObservable,
    shots: u64,
    seed: u64,
) -> Result<ShotSimulation> {
    if !observable.is_unitary() {
        return Err(Error::NotUnitary(observable.unitarity_deviation));
    }
    if shots == 0 {
        return Err(Error::Domain("shot count must be at least 1".into()));
    }
    let expected = aev_from_sweeps(pair, f, spectrum, observable)?;
    let [px, py, pe] = outcome_probabilities(pair, f, spectrum, observable)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = draw(Basis::X, px, shots, &mut rng)?;
    let y = draw(Basis::Y, py, shots, &mut rng)?;
    let echo = draw(Basis::Echo, pe, shots, &mut rng)?;
    let e = echo.mean();
    if e <= 0.0 {
        return Err(Error::VanishingDenominator {
            denominator: e,
            epsilon: expected.epsilon_forward.max(expected.epsilon_backward),
            delta: expected.delta,
        });
    }
    let xm = x.mean();
    let value = xm / e;
    let std_error = (x.mean_variance() / (e * e) + xm * xm * echo.mean_variance() / e.powi(4)).sqrt();
    Ok(ShotSimulation {
        imag_value: y.mean() / e,
        x,
        y,
        echo,
        value,
        std_error,
        expected,
    })
}

/// Full pipeline: sweeps, Fourier entries, exact probabilities and sampling.
pub fn simulate_shots(
    problem: &AdiabaticProblem,
    dist: &RandomTimeDistribution,
    observable: &DenseOperator,
    shots: u64,
    seed: u64,
) -> Result<ShotSimulation> {
    let dev = observable.unitarity_deviation();
    if dev > 1e-9 {
        return Err(Error::NotUnitary(dev));
    }
    let spectrum = problem.target_spectrum();
    let obs = EigenObservable::new(observable, spectrum)?;
    let pair = prepare_sweeps(problem)?;
    let f = fourier_matrix(dist, spectrum)?;
    shots_from_sweeps(&pair, &f, spectrum, &obs, shots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adiabatic::Schedule;
    use crate::dephasing::{approx_dephase_exact, ideal_dephase};
    use crate::linalg::{build_operator, eigendecompose, max_abs, CVector, PauliTerm};
    use crate::models::{ising_pair, reflection_observable, IsingSpec};
    use rand::Rng;

    fn diag_state(p: &[f64]) -> DensityMatrix {
        let v = CVector::from_iterator(p.len(), p.iter().map(|&x| C64::new(x, 0.0)));
        DensityMatrix::new(CMatrix::from_diagonal(&v)).unwrap()
    }

    fn pauli(s: &str) -> DenseOperator {
        build_operator(vec![PauliTerm::new(1.0, s).unwrap()], s.len())
            .unwrap()
            .matrix()
            .clone()
    }

    fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let a = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let m = &a * a.adjoint();
        let tr = trace(&m);
        DensityMatrix::new(m / tr).unwrap()
    }

    fn random_pure(dim: usize, rng: &mut ChaCha8Rng) -> PureState {
        PureState::normalized(CVector::from_fn(dim, |_, _| {
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        }))
        .unwrap()
    }

    #[test]
    fn purified_examples() {
        let rho = diag_state(&[0.9, 0.1]);
        let z = pauli("Z");
        let v = purified_estimator(&rho, &z, 2).unwrap();
        assert!((v - (0.81 - 0.01) / 0.82).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = random_state(4, &mut rng);
        let o = pauli("XZ");
        let k1 = purified_estimator(&r, &o, 1).unwrap();
        assert!((k1 - crate::linalg::expectation(&o, &r).unwrap()).abs() < 1e-13);
        let psi = random_pure(4, &mut rng);
        let want = crate::linalg::expectation(&o, &psi.density()).unwrap();
        for k in 1..5 {
            assert!((purified_estimator(&psi.density(), &o, k).unwrap() - want).abs() < 1e-12);
        }
        assert!(purified_estimator(&r, &o, 0).is_err());
    }

    #[test]
    fn purification_hierarchy() {
        // Dominant ground weight: error is non-increasing in k.
        let s = Spectrum::of_diagonal(&[-1.0, 0.0, 0.5, 2.0], 0.0).unwrap();
        let o = pauli("ZX").combine(1.0, &pauli("ZI"), 0.5).unwrap();
        let o00 = s.to_eigenbasis(o.matrix())[(0, 0)].re;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let c0 = 0.6 + 0.39 * rng.random::<f64>();
            let mut rest: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
            let sum: f64 = rest.iter().sum();
            rest.iter_mut().for_each(|x| *x *= (1.0 - c0) / sum);
            let mut p = vec![c0];
            p.extend(rest);
            let rho = diag_state(&p);
            let errs: Vec<f64> = (1..=3)
                .map(|k| (purified_estimator(&rho, &o, k).unwrap() - o00).abs())
                .collect();
            assert!(errs[1] <= errs[0] + 1e-12 && errs[2] <= errs[1] + 1e-12, "{p:?}: {errs:?}");
        }
    }

    #[test]
    fn gamma_examples() {
        let s = Spectrum::of_diagonal(&[0.0, 1.0], 0.0).unwrap();
        assert_eq!(gamma(&diag_state(&[1.0, 0.0]), &s, 2).unwrap(), 0.0);
        let g = gamma(&diag_state(&[0.9, 0.1]), &s, 2).unwrap();
        assert!((g - 1.0 / (1.0 + 0.81 / 0.01)).abs() < 1e-15);
        assert!(matches!(gamma(&diag_state(&[0.0, 1.0]), &s, 2), Err(Error::NoGroundSupport)));
        let plus = DensityMatrix::new(CMatrix::from_element(2, 2, C64::new(0.5, 0.0))).unwrap();
        assert!(matches!(gamma(&plus, &s, 2), Err(Error::NotDephased(_))));
    }

    #[test]
    fn gamma_decreases_with_k() {
        let s = Spectrum::of_diagonal(&[0.0, 1.0, 2.0, 3.0], 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        for _ in 0..300 {
            let mut p: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
            let sum: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= sum);
            let rho = diag_state(&p);
            for k in 1..4u32 {
                let eps = 1.0 - p[0];
                let tr: f64 = p[1..].iter().map(|x| (x / eps).powi(k as i32)).sum();
                if p[0] > eps * tr.powf(1.0 / k as f64) {
                    let a = gamma(&rho, &s, k).unwrap();
                    let b = gamma(&rho, &s, k + 1).unwrap();
                    assert!(b < a, "{p:?} k={k}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 50);
    }

    #[test]
    fn tilde_pair_patterns() {
        let s = Spectrum::of_diagonal(&[-1.0, 0.0, 0.5, 2.0], 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_state(4, &mut rng);
        let sigma = random_state(4, &mut rng);
        let (rt, st) = build_tilde_pair(&rho, &sigma, &FourierMatrix::all_ones(4), &s).unwrap();
        assert!(max_abs(&(rt.matrix() - rho.matrix())) < 1e-15);
        assert!(max_abs(&(st.matrix() - sigma.matrix())) < 1e-15);
        let proj = FourierMatrix::projection(&s);
        let (rt, st) = build_tilde_pair(&rho, &sigma, &proj, &s).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                if j != k {
                    assert_eq!(rt.matrix()[(j, k)], C64::new(0.0, 0.0));
                    assert_eq!(st.matrix()[(j, k)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn tilde_pair_matches_composed_channels() {
        let h = build_operator(
            vec![
                PauliTerm::new(0.3, "ZI").unwrap(),
                PauliTerm::new(0.8, "IZ").unwrap(),
                PauliTerm::new(0.4, "XX").unwrap(),
            ],
            2,
        )
        .unwrap();
        let s = eigendecompose(h.matrix(), 0.0).unwrap();
        let o = pauli("XY").combine(1.0, &pauli("ZZ"), 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for dist in [
            RandomTimeDistribution::bump(1.7).unwrap(),
            RandomTimeDistribution::uniform(2.3).unwrap(),
        ] {
            let f = fourier_matrix(&dist, &s).unwrap();
            let rho = random_state(4, &mut rng);
            let sigma = random_state(4, &mut rng);
            let (rt, st) = build_tilde_pair(&rho, &sigma, &f, &s).unwrap();
            let lhs = trace(&(rt.matrix() * st.matrix() * s.to_eigenbasis(o.matrix())));
            // Channel applied in the computational basis, twice.
            let d = |x: &CMatrix| s.from_eigenbasis(&f.hadamard(&s.to_eigenbasis(x)));
            let inner = o.matrix() * d(rho.matrix());
            let rhs = trace(&(sigma.matrix() * d(&inner)));
            assert!((lhs - rhs).norm() < 1e-10, "{dist}");
            // ρ̃ is the exact channel output.
            let out = approx_dephase_exact(&rho, &f, &s).unwrap();
            assert!(max_abs(&(s.to_eigenbasis(out.matrix()) - rt.matrix())) < 1e-12);
        }
    }

    #[test]
    fn error_bound_properties() {
        assert_eq!(error_bound(0.0, 0.3, 1.0).unwrap(), 0.0);
        for e in [1e-2, 1e-3, 1e-4, 1e-6] {
            let r = error_bound(e, 0.0, 1.5).unwrap() / (e * e);
            assert!(r < 3.0 * 1.01 + 10.0 * e && r > 3.0);
        }
        assert!((error_bound(1e-8, 0.0, 1.0).unwrap() / 1e-16 - 2.0).abs() < 1e-6);
        assert!(matches!(error_bound(0.3, 0.0, 1.0), Err(Error::BoundValidity(_))));
        assert!(error_bound(-0.1, 0.0, 1.0).is_err());
        assert!(error_bound(0.1, 1.5, 1.0).is_err());
        // Monotone in delta.
        assert!(error_bound(0.01, 0.2, 1.0).unwrap() > error_bound(0.01, 0.1, 1.0).unwrap());
    }

    fn ising_problem(n: usize, t_ad: f64) -> AdiabaticProblem {
        let (h0, ht) = ising_pair(&IsingSpec::new(n)).unwrap();
        AdiabaticProblem::new(h0, ht, Schedule::linear(t_ad).unwrap(), 0.01).unwrap()
    }

    #[test]
    fn consistency_chain_for_equal_states() {
        // ρ_ad = σ_ad and ideal dephasing: the ratio reduces to the k = 2
        // purified estimate of the dephased state.
        let s = Spectrum::of_diagonal(&[-1.0, -0.2, 0.5, 2.0], 0.0).unwrap();
        let o = pauli("ZX").combine(1.0, &pauli("IZ"), 0.4).unwrap();
        let obs = EigenObservable::new(&o, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let psi = random_pure(4, &mut rng);
            let pair = SweepPair {
                forward: psi.clone(),
                echo: psi.clone(),
                epsilon_forward: 0.0,
                epsilon_backward: 0.0,
            };
            let r = aev_from_sweeps(&pair, &FourierMatrix::projection(&s), &s, &obs).unwrap();
            let rho_d = ideal_dephase(&psi.density(), &s).unwrap();
            let g = gamma(&rho_d, &s, 2).unwrap();
            let c = s.coefficients(&psi).unwrap();
            let p: Vec<f64> = c.iter().map(|z| z.norm_sqr()).collect();
            let eps: f64 = p[1..].iter().sum();
            let oe = s.to_eigenbasis(o.matrix());
            let perp_num: f64 = (1..4).map(|j| (p[j] / eps).powi(2) * oe[(j, j)].re).sum();
            let perp_den: f64 = (1..4).map(|j| (p[j] / eps).powi(2)).sum();
            let want = (1.0 - g) * oe[(0, 0)].re + g * perp_num / perp_den;
            assert!((r.value - want).abs() < 1e-9);
            assert!((r.gamma.unwrap() - g).abs() < 1e-12);
            let k2 = purified_estimator(&rho_d, &o, 2).unwrap();
            assert!((r.value - k2).abs() < 1e-9);
        }
    }

    #[test]
    fn long_sweep_recovers_ground_value() {
        let p = ising_problem(3, 150.0);
        let s = p.target_spectrum().clone();
        let o = reflection_observable(&s).unwrap();
        let r = aev_estimate(&p, &RandomTimeDistribution::Ideal, &o).unwrap();
        assert!((r.value - r.exact_reference.unwrap()).abs() < 1e-6);
        assert!(r.imag_residual.abs() < 1e-12);
        assert!((r.value - r.exact_reference.unwrap()).abs() <= r.bound.unwrap());
        let q = qaa_estimate(&p, &pauli("III").scale(1.0)).unwrap();
        assert!((q.value - 1.0).abs() < 1e-12, "{q:?}");
    }

    #[test]
    fn time_reversal_shortcut_matches_adjoint_sweep() {
        let p = ising_problem(3, 7.0);
        let pair = prepare_sweeps(&p).unwrap();
        let generic = evolve_backward_adjoint(&p, p.initial_state()).unwrap();
        assert!((pair.echo.amplitudes() - generic.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn bound_holds_and_denominator_is_positive() {
        let limit = bound_validity_limit();
        for t in [3.0, 5.0, 8.0, 12.0, 20.0, 40.0] {
            let p = ising_problem(4, t);
            let s = p.target_spectrum().clone();
            let o = reflection_observable(&s).unwrap();
            let obs = EigenObservable::new(&o, &s).unwrap();
            let pair = prepare_sweeps(&p).unwrap();
            for dist in [
                RandomTimeDistribution::Ideal,
                RandomTimeDistribution::bump(10.0).unwrap(),
                RandomTimeDistribution::bump(50.0).unwrap(),
            ] {
                let f = fourier_matrix(&dist, &s).unwrap();
                let r = aev_from_sweeps(&pair, &f, &s, &obs).unwrap();
                let eps = r.epsilon_forward.max(r.epsilon_backward);
                if eps < limit {
                    let floor = (1.0 - eps).powi(2) - 2.0 * eps * (1.0 - eps) - eps * eps;
                    assert!(r.denominator.norm() >= floor - 1e-12, "T={t} {dist}");
                    assert!(r.error().unwrap().abs() <= r.bound.unwrap(), "T={t} {dist}");
                }
                if dist == RandomTimeDistribution::Ideal {
                    assert_eq!(r.imag_residual, 0.0);
                } else {
                    // Finite dephasing leaves a complex ratio of order δ.
                    assert!(r.imag_residual.abs() <= 2.0 * r.delta);
                }
            }
        }
    }

    #[test]
    fn shot_probabilities_and_identity() {
        let p = ising_problem(2, 4.0);
        let s = p.target_spectrum().clone();
        let pair = prepare_sweeps(&p).unwrap();
        let f = fourier_matrix(&RandomTimeDistribution::bump(3.0).unwrap(), &s).unwrap();
        let o = reflection_observable(&s).unwrap();
        let probs = outcome_probabilities(&pair, &f, &s, &EigenObservable::new(&o, &s).unwrap()).unwrap();
        for row in probs {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(row.iter().all(|&q| q > -1e-12));
        }
        let id = EigenObservable::new(&DenseOperator::identity(4).unwrap(), &s).unwrap();
        let probs = outcome_probabilities(&pair, &f, &s, &id).unwrap();
        for (x, e) in probs[0].iter().zip(&probs[2]) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn shot_estimator_converges() {
        let p = ising_problem(2, 4.0);
        let s = p.target_spectrum().clone();
        let o = reflection_observable(&s).unwrap();
        let sim = simulate_shots(&p, &RandomTimeDistribution::bump(3.0).unwrap(), &o, 1_000_000, 12).unwrap();
        let diff = (sim.value - sim.expected.value).abs();
        assert!(diff < 4.0 * sim.std_error, "{diff} vs {}", sim.std_error);
        assert!(sim.std_error < 5e-3);
        for rec in [&sim.x, &sim.y, &sim.echo] {
            assert_eq!(rec.plus + rec.minus + rec.zero, rec.shots);
            assert!((rec.frequencies().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let again = simulate_shots(&p, &RandomTimeDistribution::bump(3.0).unwrap(), &o, 1_000_000, 12).unwrap();
        assert_eq!(sim, again);
    }

    #[test]
    fn shots_reject_non_unitary() {
        let p = ising_problem(2, 4.0);
        let m = crate::models::magnetization(2).unwrap();
        assert!(matches!(
            simulate_shots(&p, &RandomTimeDistribution::Ideal, m.matrix(), 10, 0),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn vanishing_denominator_reports_diagnostics() {
        let s = Spectrum::of_diagonal(&[0.0, 1.0], 0.0).unwrap();
        let obs = EigenObservable::new(&pauli("Z"), &s).unwrap();
        let pair = SweepPair {
            forward: PureState::basis(2, 0).unwrap(),
            echo: PureState::basis(2, 1).unwrap(),
            epsilon_forward: 0.0,
            epsilon_backward: 1.0,
        };
        let r = aev_from_sweeps(&pair, &FourierMatrix::projection(&s), &s, &obs);
        assert!(matches!(r, Err(Error::VanishingDenominator { epsilon, .. }) if epsilon == 1.0));
    }
}
