use std::collections::HashMap;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bounds::{bump_norm, bump_profile};
use super::quadrature::{integrate, DEFAULT_ABS_TOL};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Spectrum};

const MAX_REJECTIONS: usize = 10_000;

/// Label used in configs and output files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    None,
    Uniform,
    Bump,
    Ideal,
}

impl DistributionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistributionKind::None => "none",
            DistributionKind::Uniform => "uniform",
            DistributionKind::Bump => "bump",
            DistributionKind::Ideal => "ideal",
        }
    }
}

impl std::fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(DistributionKind::None),
            "uniform" => Ok(DistributionKind::Uniform),
            "bump" => Ok(DistributionKind::Bump),
            "ideal" => Ok(DistributionKind::Ideal),
            other => Err(Error::Distribution(format!("unknown kind `{other}`"))),
        }
    }
}

/// Distribution of the random evolution time `τ` under `H_T`.
///
/// `None` is a point mass at zero (no dephasing); `Ideal` is the `T_d → ∞`
/// limit, which projects onto the eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RandomTimeDistribution {
    None,
    Uniform { t_d: f64 },
    Bump { t_d: f64 },
    Ideal,
}

fn check_t_d(t_d: f64) -> Result<()> {
    if !(t_d > 0.0 && t_d.is_finite()) {
        return Err(Error::Distribution(format!(
            "dephasing time must be positive and finite, got {t_d}"
        )));
    }
    Ok(())
}

impl RandomTimeDistribution {
    pub fn uniform(t_d: f64) -> Result<Self> {
        check_t_d(t_d)?;
        Ok(Self::Uniform { t_d })
    }

    pub fn bump(t_d: f64) -> Result<Self> {
        check_t_d(t_d)?;
        Ok(Self::Bump { t_d })
    }

    /// Builds a distribution from a config entry. `T_d = 0` means no
    /// dephasing for the finite kinds; `T_d` is ignored for `none`/`ideal`.
    pub fn from_kind(kind: DistributionKind, t_d: f64) -> Result<Self> {
        match kind {
            DistributionKind::None => Ok(Self::None),
            DistributionKind::Ideal => Ok(Self::Ideal),
            DistributionKind::Uniform | DistributionKind::Bump if t_d == 0.0 => Ok(Self::None),
            DistributionKind::Uniform => Self::uniform(t_d),
            DistributionKind::Bump => Self::bump(t_d),
        }
    }

    pub fn kind(&self) -> DistributionKind {
        match self {
            Self::None => DistributionKind::None,
            Self::Uniform { .. } => DistributionKind::Uniform,
            Self::Bump { .. } => DistributionKind::Bump,
            Self::Ideal => DistributionKind::Ideal,
        }
    }

    /// Support length; `0` for no dephasing and `+inf` for ideal.
    pub fn t_d(&self) -> f64 {
        match *self {
            Self::None => 0.0,
            Self::Uniform { t_d } | Self::Bump { t_d } => t_d,
            Self::Ideal => f64::INFINITY,
        }
    }

    /// Normalization constant of the bump kind.
    pub fn normalization(&self) -> Option<f64> {
        match self {
            Self::Bump { .. } => Some(bump_norm()),
            _ => None,
        }
    }

    /// Probability density `P(τ)`.
    pub fn density(&self, tau: f64) -> Result<f64> {
        match *self {
            Self::Uniform { t_d } => Ok(if (0.0..=t_d).contains(&tau) { 1.0 / t_d } else { 0.0 }),
            Self::Bump { t_d } => {
                if tau <= 0.0 || tau >= t_d {
                    return Ok(0.0);
                }
                let u = tau / t_d;
                Ok(2.0 / (bump_norm() * t_d) * bump_profile(2.0 * u - 1.0))
            }
            Self::None | Self::Ideal => Err(Error::Distribution(format!(
                "`{}` has no density",
                self.kind()
            ))),
        }
    }

    /// `∫ P(τ) e^{-iΔτ} dτ`.
    pub fn fourier_transform(&self, gap: f64) -> Result<C64> {
        if !gap.is_finite() {
            return Err(Error::NonFinite(gap));
        }
        match *self {
            Self::None => Ok(C64::new(1.0, 0.0)),
            Self::Ideal => Ok(if gap == 0.0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }),
            Self::Uniform { t_d } => Ok(uniform_transform(gap * t_d)),
            Self::Bump { t_d } => bump_transform(gap * t_d),
        }
    }

    /// Transform by direct quadrature of the density, for any kind with one.
    pub fn fourier_by_quadrature(&self, gap: f64) -> Result<C64> {
        let x = gap * self.t_d();
        match *self {
            Self::Uniform { .. } => integrate(
                |u| C64::from_polar(1.0, -x * u),
                0.0,
                1.0,
                DEFAULT_ABS_TOL,
                pieces(x),
            ),
            Self::Bump { .. } => bump_transform(x),
            _ => self.fourier_transform(gap),
        }
    }

    /// Draws one `τ`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        match *self {
            Self::None => Ok(0.0),
            Self::Uniform { t_d } => Ok(t_d * rng.random::<f64>()),
            Self::Bump { t_d } => {
                // Uniform proposal, envelope at the mode u = 1/2.
                for _ in 0..MAX_REJECTIONS {
                    let u: f64 = rng.random();
                    let accept = (bump_profile(2.0 * u - 1.0) * std::f64::consts::E).min(1.0);
                    if rng.random::<f64>() < accept {
                        return Ok(t_d * u);
                    }
                }
                Err(Error::Sampler(MAX_REJECTIONS))
            }
            Self::Ideal => Err(Error::Distribution(
                "the ideal limit cannot be sampled; use the projection channel".into(),
            )),
        }
    }
}

impl std::fmt::Display for RandomTimeDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Uniform { t_d } | Self::Bump { t_d } => write!(f, "{}(T_d={t_d})", self.kind()),
            _ => write!(f, "{}", self.kind()),
        }
    }
}

fn pieces(x: f64) -> usize {
    ((x.abs() / std::f64::consts::TAU).ceil() as usize + 1).min(4096)
}

/// `(1 - e^{-ix}) / (ix)`.
fn uniform_transform(x: f64) -> C64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        C64::new(1.0 - x2 / 6.0, -x / 2.0 + x * x2 / 24.0)
    } else {
        (C64::new(1.0, 0.0) - C64::from_polar(1.0, -x)) / C64::new(0.0, x)
    }
}

/// Bump transform in the rescaled variable `u = τ / T_d`, `x = Δ T_d`.
fn bump_transform(x: f64) -> Result<C64> {
    if x == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let scale = 2.0 / bump_norm();
    integrate(
        |u| C64::from_polar(scale * bump_profile(2.0 * u - 1.0), -x * u),
        0.0,
        1.0,
        DEFAULT_ABS_TOL,
        pieces(x),
    )
}

/// Transform values at all eigenvalue differences of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMatrix {
    entries: CMatrix,
    delta: f64,
}

impl FourierMatrix {
    /// Wraps precomputed entries; `F_jj` must be one and `F_kj = F_jk*`.
    pub fn from_entries(entries: CMatrix) -> Result<Self> {
        let dim = entries.nrows();
        if dim != entries.ncols() || dim < 2 {
            return Err(Error::DimensionMismatch {
                left: entries.nrows(),
                right: entries.ncols(),
            });
        }
        for j in 0..dim {
            if (entries[(j, j)] - C64::new(1.0, 0.0)).norm() > 1e-12 {
                return Err(Error::Distribution(format!("F_{j}{j} = {} != 1", entries[(j, j)])));
            }
            for k in 0..j {
                if (entries[(j, k)] - entries[(k, j)].conj()).norm() > 1e-12 {
                    return Err(Error::NotHermitian((entries[(j, k)] - entries[(k, j)].conj()).norm()));
                }
            }
        }
        let delta = (1..dim).map(|j| entries[(0, j)].norm()).fold(0.0, f64::max);
        Ok(Self { entries, delta })
    }

    /// No dephasing: every entry is one.
    pub fn all_ones(dim: usize) -> Self {
        Self {
            entries: CMatrix::from_element(dim, dim, C64::new(1.0, 0.0)),
            delta: 1.0,
        }
    }

    /// Ideal dephasing: one inside degenerate blocks, zero elsewhere.
    pub fn projection(spectrum: &Spectrum) -> Self {
        let dim = spectrum.dim();
        let entries = CMatrix::from_fn(dim, dim, |j, k| {
            if spectrum.same_block(j, k) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let delta = (1..dim).map(|j| entries[(0, j)].norm()).fold(0.0, f64::max);
        Self { entries, delta }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// `max_{j>0} |F_0j|`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Entrywise product `F ∘ A` (both in the eigenbasis).
    pub fn hadamard(&self, a: &CMatrix) -> CMatrix {
        self.entries.component_mul(a)
    }
}

/// `F_jk = 𝓕[P](E_j - E_k)`; pairs inside one degenerate block are set to one.
pub fn fourier_matrix(dist: &RandomTimeDistribution, spectrum: &Spectrum) -> Result<FourierMatrix> {
    let dim = spectrum.dim();
    match dist {
        RandomTimeDistribution::None => return Ok(FourierMatrix::all_ones(dim)),
        RandomTimeDistribution::Ideal => return Ok(FourierMatrix::projection(spectrum)),
        _ => {}
    }
    let e = spectrum.eigenvalues();
    let mut cache: HashMap<u64, C64> = HashMap::new();
    let mut entries = CMatrix::from_element(dim, dim, C64::new(1.0, 0.0));
    for j in 0..dim {
        for k in (j + 1)..dim {
            if spectrum.same_block(j, k) {
                continue;
            }
            let gap = e[j] - e[k];
            let f = match cache.get(&gap.to_bits()) {
                Some(&f) => f,
                None => {
                    let f = dist.fourier_transform(gap)?;
                    cache.insert(gap.to_bits(), f);
                    f
                }
            };
            entries[(j, k)] = f;
            entries[(k, j)] = f.conj();
        }
    }
    let delta = (1..dim).map(|j| entries[(0, j)].norm()).fold(0.0, f64::max);
    Ok(FourierMatrix { entries, delta })
}

/// Monte-Carlo estimate `F_jk = (1/S) Σ_i e^{-i(E_j - E_k)τ_i}`.
///
/// Averaging the phase matrix is the same as averaging the conjugations
/// `e^{-iH τ_i} ρ e^{iH τ_i}`, so the result is an exact mixture of unitary
/// channels.
pub fn sampled_fourier_matrix<R: Rng + ?Sized>(
    dist: &RandomTimeDistribution,
    spectrum: &Spectrum,
    samples: usize,
    rng: &mut R,
) -> Result<FourierMatrix> {
    if samples == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    let dim = spectrum.dim();
    match dist {
        RandomTimeDistribution::None => return Ok(FourierMatrix::all_ones(dim)),
        RandomTimeDistribution::Ideal => return Ok(FourierMatrix::projection(spectrum)),
        _ => {}
    }
    let e = spectrum.eigenvalues();
    let mut acc = CMatrix::zeros(dim, dim);
    let mut phases = vec![C64::new(0.0, 0.0); dim];
    for _ in 0..samples {
        let tau = dist.sample(rng)?;
        for (p, &ej) in phases.iter_mut().zip(e) {
            *p = C64::from_polar(1.0, -ej * tau);
        }
        for k in 0..dim {
            let pk = phases[k].conj();
            for j in 0..dim {
                acc[(j, k)] += phases[j] * pk;
            }
        }
    }
    acc /= C64::new(samples as f64, 0.0);
    for j in 0..dim {
        acc[(j, j)] = C64::new(1.0, 0.0);
        for k in 0..j {
            acc[(j, k)] = acc[(k, j)].conj();
        }
    }
    let delta = (1..dim).map(|j| acc[(0, j)].norm()).fold(0.0, f64::max);
    Ok(FourierMatrix { entries: acc, delta })
}
