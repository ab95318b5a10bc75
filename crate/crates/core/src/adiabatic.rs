//! Quasi-adiabatic sweeps along `H(s) = (1 - s) H0 + s HT`.
//!
//! Each integrator step applies the exact exponential of the Hamiltonian
//! frozen at the step midpoint, `exp(-i H(s(t + dt/2)) dt)`, obtained from a
//! per-step eigendecomposition. The product of step propagators is unitary by
//! construction, so the state norm is never renormalized. A literal explicit
//! Euler step (with renormalization) is available as [`Integrator::Euler`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, CMatrix, CVector, DenseOperator, PauliOperator, PureState, Spectrum};

/// Default integrator step.
pub const DEFAULT_DT: f64 = 0.01;

const NORM_DRIFT_TOL: f64 = 1e-8;
const GROUND_ENERGY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
enum ScheduleKind {
    Linear,
    /// Piecewise-linear `(t / T, s)` knots.
    Table(Vec<(f64, f64)>),
}

/// Monotone map from physical time `t ∈ [0, T_ad]` to `s ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
    duration: f64,
}

impl Schedule {
    pub fn linear(duration: f64) -> Result<Self> {
        check_duration(duration)?;
        Ok(Self {
            kind: ScheduleKind::Linear,
            duration,
        })
    }

    /// Piecewise-linear schedule through `(t / T_ad, s)` knots. The first knot
    /// must be `(0, 0)`, the last `(1, 1)`; times strictly increase and `s`
    /// never decreases.
    pub fn table(duration: f64, knots: Vec<(f64, f64)>) -> Result<Self> {
        check_duration(duration)?;
        if knots.len() < 2 {
            return Err(Error::Schedule("need at least two knots".into()));
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        if first != (0.0, 0.0) || last != (1.0, 1.0) {
            return Err(Error::Schedule(
                "knots must start at (0, 0) and end at (1, 1)".into(),
            ));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Schedule("knot times must strictly increase".into()));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::Schedule("s must be non-decreasing".into()));
            }
        }
        Ok(Self {
            kind: ScheduleKind::Table(knots),
            duration,
        })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        check_duration(duration)?;
        Ok(Self {
            kind: self.kind.clone(),
            duration,
        })
    }

    /// `s(t)`, clamped to `[0, 1]` outside `[0, T_ad]`.
    pub fn s_at(&self, t: f64) -> f64 {
        let u = (t / self.duration).clamp(0.0, 1.0);
        match &self.kind {
            ScheduleKind::Linear => u,
            ScheduleKind::Table(knots) => {
                let i = knots.partition_point(|k| k.0 <= u).clamp(1, knots.len() - 1);
                let (u0, s0) = knots[i - 1];
                let (u1, s1) = knots[i];
                s0 + (s1 - s0) * (u - u0) / (u1 - u0)
            }
        }
    }
}

fn check_duration(duration: f64) -> Result<()> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::Schedule(format!("duration must be positive, got {duration}")));
    }
    Ok(())
}

/// Step rule used by the sweep engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Exact exponential of the midpoint-frozen Hamiltonian.
    #[default]
    Midpoint,
    /// `psi <- psi - i H psi dt` followed by renormalization.
    Euler,
}

/// Operators are held as real matrices when they have no imaginary part,
/// which lets every step use the real symmetric eigensolver.
#[derive(Debug, Clone)]
enum Pair {
    Real(DMatrix<f64>, DMatrix<f64>),
    Complex(CMatrix, CMatrix),
}

/// Sweep definition: endpoints, schedule, step and initial state.
#[derive(Debug, Clone)]
pub struct AdiabaticProblem {
    h0: PauliOperator,
    ht: PauliOperator,
    schedule: Schedule,
    dt: f64,
    initial_state: PureState,
    integrator: Integrator,
    target: Spectrum,
    pair: Pair,
}

impl AdiabaticProblem {
    /// Uses the (numerical) ground state of `h0` as the initial state.
    pub fn new(h0: PauliOperator, ht: PauliOperator, schedule: Schedule, dt: f64) -> Result<Self> {
        let s0 = eigendecompose(h0.matrix(), 0.0)?;
        s0.require_nondegenerate_ground()?;
        let psi0 = s0.ground_state();
        Self::with_initial_state(h0, ht, schedule, dt, psi0)
    }

    /// `initial_state` must be a ground state of `h0` (energy within 1e-8).
    pub fn with_initial_state(
        h0: PauliOperator,
        ht: PauliOperator,
        schedule: Schedule,
        dt: f64,
        initial_state: PureState,
    ) -> Result<Self> {
        if h0.qubits() != ht.qubits() {
            return Err(Error::DimensionMismatch {
                left: h0.dim(),
                right: ht.dim(),
            });
        }
        if initial_state.dim() != h0.dim() {
            return Err(Error::DimensionMismatch {
                left: initial_state.dim(),
                right: h0.dim(),
            });
        }
        if !(dt > 0.0) || dt > schedule.duration() {
            return Err(Error::Sweep(format!(
                "dt = {dt} must lie in (0, T_ad = {}]",
                schedule.duration()
            )));
        }
        let s0 = eigendecompose(h0.matrix(), 0.0)?;
        let v = initial_state.amplitudes();
        let energy = v.dotc(&(h0.matrix().matrix() * v)).re;
        if (energy - s0.ground_energy()).abs() > GROUND_ENERGY_TOL {
            return Err(Error::NotGroundState {
                energy,
                ground: s0.ground_energy(),
            });
        }
        let target = eigendecompose(ht.matrix(), 0.0)?;
        let (m0, mt) = (h0.matrix().matrix(), ht.matrix().matrix());
        let pair = if m0.iter().chain(mt.iter()).all(|z| z.im == 0.0) {
            Pair::Real(m0.map(|z| z.re), mt.map(|z| z.re))
        } else {
            Pair::Complex(m0.clone(), mt.clone())
        };
        Ok(Self {
            h0,
            ht,
            schedule,
            dt,
            initial_state,
            integrator: Integrator::default(),
            target,
            pair,
        })
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    /// Same endpoints and step with a different sweep duration.
    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        let schedule = self.schedule.with_duration(duration)?;
        if self.dt > duration {
            return Err(Error::Sweep(format!("dt = {} exceeds T_ad = {duration}", self.dt)));
        }
        Ok(Self {
            schedule,
            ..self.clone()
        })
    }

    pub fn h0(&self) -> &PauliOperator {
        &self.h0
    }

    pub fn ht(&self) -> &PauliOperator {
        &self.ht
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn duration(&self) -> f64 {
        self.schedule.duration()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn integrator(&self) -> Integrator {
        self.integrator
    }

    pub fn initial_state(&self) -> &PureState {
        &self.initial_state
    }

    /// Spectrum of the target Hamiltonian `HT`.
    pub fn target_spectrum(&self) -> &Spectrum {
        &self.target
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// True when `H0`, `HT` and the initial state are all real, so the
    /// dynamics commutes with complex conjugation.
    pub fn is_time_reversal_symmetric(&self) -> bool {
        matches!(self.pair, Pair::Real(..)) && self.initial_state.is_real()
    }

    /// Number of steps and the effective step `T_ad / steps`.
    pub fn steps(&self) -> (usize, f64) {
        let t = self.duration();
        let n = ((t / self.dt).round() as usize).max(1);
        (n, t / n as f64)
    }

    /// Midpoint `s` values of the forward sweep, in time order.
    fn forward_midpoints(&self) -> Vec<f64> {
        let (n, h) = self.steps();
        (0..n)
            .map(|k| self.schedule.s_at((k as f64 + 0.5) * h))
            .collect()
    }

    /// Left-endpoint `s` values (Euler), in time order.
    fn forward_left_points(&self) -> Vec<f64> {
        let (n, h) = self.steps();
        (0..n).map(|k| self.schedule.s_at(k as f64 * h)).collect()
    }

    /// `s` values sampled by the sweep in forward time order.
    fn sample_points(&self) -> Vec<f64> {
        match self.integrator {
            Integrator::Midpoint => self.forward_midpoints(),
            Integrator::Euler => self.forward_left_points(),
        }
    }

    /// Backward sweep samples `s(T - t)` at the same offsets within each step.
    fn backward_points(&self) -> Vec<f64> {
        let (n, h) = self.steps();
        let t = self.duration();
        let offset = match self.integrator {
            Integrator::Midpoint => 0.5,
            Integrator::Euler => 0.0,
        };
        (0..n)
            .map(|k| self.schedule.s_at(t - (k as f64 + offset) * h))
            .collect()
    }

    fn propagate(&self, start: &CVector, points: &[f64], sign: f64) -> Result<CVector> {
        let (_, h) = self.steps();
        let mut psi = start.clone();
        for (k, &s) in points.iter().enumerate() {
            psi = match (&self.pair, self.integrator) {
                (Pair::Real(a, b), Integrator::Midpoint) => {
                    let hm = a * (1.0 - s) + b * s;
                    real_exp_step(hm, &psi, sign * h)
                }
                (Pair::Complex(a, b), Integrator::Midpoint) => {
                    let hm = a * C64::new(1.0 - s, 0.0) + b * C64::new(s, 0.0);
                    complex_exp_step(&hm, &psi, sign * h)
                }
                (pair, Integrator::Euler) => {
                    let hm = match pair {
                        Pair::Real(a, b) => (a * (1.0 - s) + b * s).map(|x| C64::new(x, 0.0)),
                        Pair::Complex(a, b) => a * C64::new(1.0 - s, 0.0) + b * C64::new(s, 0.0),
                    };
                    let next = &psi - (&hm * &psi) * C64::new(0.0, sign * h);
                    let norm = next.norm();
                    next / C64::new(norm, 0.0)
                }
            };
            if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Integrator(k));
            }
        }
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_DRIFT_TOL {
            return Err(Error::Sweep(format!("norm drifted to {norm}")));
        }
        Ok(psi)
    }
}

fn real_exp_step(h: DMatrix<f64>, psi: &CVector, t: f64) -> CVector {
    let eig = SymmetricEigen::new(h);
    let v = &eig.eigenvectors;
    let re = DVector::from_iterator(psi.len(), psi.iter().map(|z| z.re));
    let im = DVector::from_iterator(psi.len(), psi.iter().map(|z| z.im));
    let cr = v.tr_mul(&re);
    let ci = v.tr_mul(&im);
    // c_j <- exp(-i E_j t) c_j
    let mut nr = DVector::zeros(psi.len());
    let mut ni = DVector::zeros(psi.len());
    for j in 0..psi.len() {
        let (sn, cs) = (-eig.eigenvalues[j] * t).sin_cos();
        nr[j] = cs * cr[j] - sn * ci[j];
        ni[j] = sn * cr[j] + cs * ci[j];
    }
    let out_r = v * nr;
    let out_i = v * ni;
    CVector::from_iterator(
        psi.len(),
        out_r.iter().zip(out_i.iter()).map(|(&r, &i)| C64::new(r, i)),
    )
}

fn complex_exp_step(h: &CMatrix, psi: &CVector, t: f64) -> CVector {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut c = v.adjoint() * psi;
    for (j, cj) in c.iter_mut().enumerate() {
        *cj *= C64::from_polar(1.0, -eig.eigenvalues[j] * t);
    }
    v * c
}

/// Result of a single sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub final_state: PureState,
    /// Infidelity against the reference ground state of the sweep.
    pub infidelity: f64,
    pub step_count: usize,
}

/// `H(s) = (1 - s) H0 + s HT`.
pub fn interpolated_hamiltonian(problem: &AdiabaticProblem, s: f64) -> Result<DenseOperator> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::ScheduleParameter(s));
    }
    problem
        .h0
        .matrix()
        .combine(1.0 - s, problem.ht.matrix(), s)
}

/// Applies `U_→` to the initial state; infidelity is measured against the
/// ground state of `HT`.
pub fn evolve_forward(problem: &AdiabaticProblem) -> Result<SweepResult> {
    let points = problem.sample_points();
    let psi = problem.propagate(problem.initial_state.amplitudes(), &points, 1.0)?;
    let final_state = PureState::from_vector_unchecked(psi);
    let eps = infidelity(&final_state, &problem.target)?;
    Ok(SweepResult {
        final_state,
        infidelity: eps,
        step_count: points.len(),
    })
}

/// Applies `U_←` (positive-time evolution under `H(s(T_ad - t))`) to `start`;
/// infidelity is measured against the initial state (the ground state of `H0`).
pub fn evolve_backward(problem: &AdiabaticProblem, start: &PureState) -> Result<SweepResult> {
    check_start(problem, start)?;
    let points = problem.backward_points();
    let psi = problem.propagate(start.amplitudes(), &points, 1.0)?;
    let final_state = PureState::from_vector_unchecked(psi);
    let eps = 1.0 - final_state.fidelity(&problem.initial_state)?;
    Ok(SweepResult {
        final_state,
        infidelity: eps.clamp(0.0, 1.0),
        step_count: points.len(),
    })
}

/// `U_←† |start>`: the backward-sweep step propagators inverted and applied
/// in reverse order. For `start = |psi0>` this is the state whose projector
/// is `σ_ad = U_←† |psi0><psi0| U_←`.
pub fn evolve_backward_adjoint(problem: &AdiabaticProblem, start: &PureState) -> Result<PureState> {
    check_start(problem, start)?;
    let mut points = problem.backward_points();
    points.reverse();
    let psi = match problem.integrator {
        Integrator::Midpoint => problem.propagate(start.amplitudes(), &points, -1.0)?,
        // The explicit step is not unitary; invert it exactly instead of
        // flipping the sign of dt.
        Integrator::Euler => {
            let (_, h) = problem.steps();
            let mut psi = start.amplitudes().clone();
            for &s in &points {
                let hm = interpolated_hamiltonian(problem, s)?.into_matrix();
                let step = CMatrix::identity(psi.len(), psi.len()) - hm * C64::new(0.0, h);
                psi = step.adjoint() * psi;
                let norm = psi.norm();
                psi /= C64::new(norm, 0.0);
            }
            psi
        }
    };
    Ok(PureState::from_vector_unchecked(psi))
}

fn check_start(problem: &AdiabaticProblem, start: &PureState) -> Result<()> {
    if start.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            left: start.dim(),
            right: problem.dim(),
        });
    }
    let norm = start.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    Ok(())
}

/// `1 - |<E_0|state>|^2` for a nondegenerate ground state.
pub fn infidelity(state: &PureState, spectrum: &Spectrum) -> Result<f64> {
    if state.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: spectrum.dim(),
        });
    }
    spectrum.require_nondegenerate_ground()?;
    let f = spectrum.ground_state().fidelity(state)?;
    Ok((1.0 - f).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{build_operator, PauliTerm};

    fn op(terms: &[(f64, &str)]) -> PauliOperator {
        let n = terms[0].1.len();
        build_operator(
            terms
                .iter()
                .map(|(c, s)| PauliTerm::new(*c, s).unwrap())
                .collect(),
            n,
        )
        .unwrap()
    }

    /// Two-qubit avoided crossing with a complex (Y) term.
    fn lz_problem(duration: f64, dt: f64) -> AdiabaticProblem {
        let h0 = op(&[(1.0, "XI"), (1.0, "IX"), (0.2, "ZZ")]);
        let ht = op(&[(1.0, "ZI"), (0.5, "IZ"), (-0.7, "ZZ"), (0.3, "YY"), (0.2, "XY")]);
        AdiabaticProblem::new(h0, ht, Schedule::linear(duration).unwrap(), dt).unwrap()
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let p = lz_problem(5.0, 0.01);
        let h0 = interpolated_hamiltonian(&p, 0.0).unwrap();
        let ht = interpolated_hamiltonian(&p, 1.0).unwrap();
        assert_eq!(h0.matrix(), p.h0().matrix().matrix());
        assert_eq!(ht.matrix(), p.ht().matrix().matrix());
        let mid = interpolated_hamiltonian(&p, 0.5).unwrap();
        let want = (p.h0().matrix().matrix() + p.ht().matrix().matrix()) * C64::new(0.5, 0.0);
        for (a, b) in mid.matrix().iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(matches!(
            interpolated_hamiltonian(&p, 1.2),
            Err(Error::ScheduleParameter(_))
        ));
        assert!(interpolated_hamiltonian(&p, -0.1).is_err());
    }

    #[test]
    fn schedule_tables() {
        let s = Schedule::table(10.0, vec![(0.0, 0.0), (0.5, 0.8), (1.0, 1.0)]).unwrap();
        assert_eq!(s.s_at(0.0), 0.0);
        assert!((s.s_at(2.5) - 0.4).abs() < 1e-15);
        assert!((s.s_at(7.5) - 0.9).abs() < 1e-15);
        assert_eq!(s.s_at(10.0), 1.0);
        assert!(Schedule::table(1.0, vec![(0.0, 0.0), (0.5, 0.6), (0.4, 0.7), (1.0, 1.0)]).is_err());
        assert!(Schedule::table(1.0, vec![(0.0, 0.0), (0.5, 0.6), (0.7, 0.5), (1.0, 1.0)]).is_err());
        assert!(Schedule::table(1.0, vec![(0.0, 0.1), (1.0, 1.0)]).is_err());
        assert!(Schedule::linear(0.0).is_err());
    }

    #[test]
    fn constant_hamiltonian_is_stationary() {
        let h = op(&[(1.0, "ZI"), (0.4, "IX"), (0.3, "XX")]);
        let p = AdiabaticProblem::new(h.clone(), h, Schedule::linear(7.3).unwrap(), 0.01).unwrap();
        let fwd = evolve_forward(&p).unwrap();
        assert!(fwd.infidelity < 1e-10);
        let bwd = evolve_backward(&p, p.initial_state()).unwrap();
        assert!(bwd.infidelity < 1e-10);
        assert!((bwd.final_state.fidelity(p.initial_state()).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn initial_state_must_be_ground() {
        let h0 = op(&[(1.0, "X")]);
        let ht = op(&[(1.0, "Z")]);
        let excited = PureState::basis(2, 0).unwrap();
        let err = AdiabaticProblem::with_initial_state(
            h0,
            ht,
            Schedule::linear(1.0).unwrap(),
            0.01,
            excited,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotGroundState { .. }));
    }

    #[test]
    fn bad_dt_rejected() {
        let h0 = op(&[(1.0, "X")]);
        let ht = op(&[(1.0, "Z")]);
        assert!(AdiabaticProblem::new(h0.clone(), ht.clone(), Schedule::linear(1.0).unwrap(), 2.0).is_err());
        assert!(AdiabaticProblem::new(h0, ht, Schedule::linear(1.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn infidelity_examples() {
        let s = Spectrum::of_diagonal(&[-1.0, 0.5, 2.0, 3.0], 0.0).unwrap();
        assert!(infidelity(&s.eigenvector(0), &s).unwrap().abs() < 1e-15);
        assert!((infidelity(&s.eigenvector(1), &s).unwrap() - 1.0).abs() < 1e-15);
        let sup = PureState::normalized(s.eigenvector(0).amplitudes() + s.eigenvector(1).amplitudes()).unwrap();
        assert!((infidelity(&sup, &s).unwrap() - 0.5).abs() < 1e-15);
        let phased = PureState::new(sup.amplitudes() * C64::from_polar(1.0, 2.1)).unwrap();
        assert!((infidelity(&phased, &s).unwrap() - 0.5).abs() < 1e-14);

        let degenerate = Spectrum::of_diagonal(&[-1.0, -1.0, 2.0, 3.0], 0.0).unwrap();
        assert!(matches!(
            infidelity(&degenerate.eigenvector(0), &degenerate),
            Err(Error::DegenerateGround { .. })
        ));
    }

    #[test]
    fn self_convergence_against_fine_step() {
        let coarse = evolve_forward(&lz_problem(6.0, 0.001)).unwrap();
        let fine = evolve_forward(&lz_problem(6.0, 0.0001)).unwrap();
        let diff = (coarse.final_state.amplitudes() - fine.final_state.amplitudes()).norm();
        assert!(diff < 1e-6, "diff {diff}");
    }

    #[test]
    fn second_order_convergence() {
        let reference = evolve_forward(&lz_problem(4.0, 0.002)).unwrap();
        let dev = |dt: f64| {
            let r = evolve_forward(&lz_problem(4.0, dt)).unwrap();
            (r.final_state.amplitudes() - reference.final_state.amplitudes()).norm()
        };
        let ratio = dev(0.04) / dev(0.02);
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn norm_drift_over_many_steps() {
        let p = lz_problem(1000.0, 0.01);
        let r = evolve_forward(&p).unwrap();
        assert_eq!(r.step_count, 100_000);
        assert!((r.final_state.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn backward_equals_forward_of_swapped_problem() {
        let p = lz_problem(3.0, 0.01);
        let start = p.initial_state().clone();
        let back = evolve_backward(&p, &start).unwrap();
        // Swapping the endpoints turns the reversed linear schedule into a
        // forward one; the swapped problem starts from the same vector.
        let swapped = AdiabaticProblem {
            h0: p.ht().clone(),
            ht: p.h0().clone(),
            pair: match &p.pair {
                Pair::Real(a, b) => Pair::Real(b.clone(), a.clone()),
                Pair::Complex(a, b) => Pair::Complex(b.clone(), a.clone()),
            },
            ..p.clone()
        };
        let psi = swapped
            .propagate(start.amplitudes(), &swapped.forward_midpoints(), 1.0)
            .unwrap();
        for (a, b) in back.final_state.amplitudes().iter().zip(psi.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn adjoint_inverts_backward_sweep() {
        let p = lz_problem(2.5, 0.01);
        let start = p.target_spectrum().ground_state();
        let back = evolve_backward(&p, &start).unwrap();
        let undone = evolve_backward_adjoint(&p, &back.final_state).unwrap();
        assert!((undone.amplitudes() - start.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn adjoint_overlap_gives_backward_infidelity() {
        // |<psi0|U_← |E0>|^2 = |<E0|U_←† psi0>|^2, two independent routes.
        let p = lz_problem(3.0, 0.01);
        let back = evolve_backward(&p, &p.target_spectrum().ground_state()).unwrap();
        let phi = evolve_backward_adjoint(&p, p.initial_state()).unwrap();
        let eps = infidelity(&phi, p.target_spectrum()).unwrap();
        assert!((eps - back.infidelity).abs() < 1e-12);
    }

    #[test]
    fn euler_mode_tracks_midpoint() {
        let p = lz_problem(4.0, 0.0005);
        let mid = evolve_forward(&p).unwrap();
        let euler = evolve_forward(&p.clone().with_integrator(Integrator::Euler)).unwrap();
        assert!((mid.infidelity - euler.infidelity).abs() < 1e-2);
        let phi = evolve_backward_adjoint(&p.clone().with_integrator(Integrator::Euler), p.initial_state()).unwrap();
        assert!((phi.norm() - 1.0).abs() < 1e-12);
    }
}
