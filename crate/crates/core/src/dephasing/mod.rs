//! Dephasing channels in the target-Hamiltonian eigenbasis.
//!
//! Every channel here acts as a Hadamard (entrywise) product in the
//! eigenbasis: `D[ρ]_jk = F_jk ρ_jk`. The ideal channel uses the identity
//! pattern, the degenerate channel the block pattern, and the random-time
//! channel the Fourier transform of the time distribution.

mod bounds;
mod distribution;
pub mod quadrature;

pub use bounds::{bump_delta_bound, bump_norm, lambert_w0, required_dephasing_time};
pub use distribution::{
    fourier_matrix, sampled_fourier_matrix, DistributionKind, FourierMatrix,
    RandomTimeDistribution,
};

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityMatrix, Spectrum};

fn check_dims(rho: &DensityMatrix, spectrum: &Spectrum) -> Result<()> {
    if rho.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: spectrum.dim(),
        });
    }
    Ok(())
}

/// Applies `ρ ↦ V (F ∘ V†ρV) V†` and restores exact Hermiticity.
fn hadamard_channel(rho: &DensityMatrix, spectrum: &Spectrum, pattern: &CMatrix) -> Result<DensityMatrix> {
    let eig = spectrum.to_eigenbasis(rho.matrix()).component_mul(pattern);
    let out = spectrum.from_eigenbasis(&eig);
    let sym = (&out + out.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new_unchecked_psd(sym)
}

/// Projects onto the eigenbasis diagonal. Requires a nondegenerate spectrum.
pub fn ideal_dephase(rho: &DensityMatrix, spectrum: &Spectrum) -> Result<DensityMatrix> {
    check_dims(rho, spectrum)?;
    if !spectrum.is_nondegenerate() {
        return Err(Error::DegenerateSpectrum);
    }
    degenerate_dephase(rho, spectrum)
}

/// `Σ_j Π_j ρ Π_j` over the degenerate eigenspaces.
pub fn degenerate_dephase(rho: &DensityMatrix, spectrum: &Spectrum) -> Result<DensityMatrix> {
    check_dims(rho, spectrum)?;
    hadamard_channel(rho, spectrum, FourierMatrix::projection(spectrum).entries())
}

/// Random-time channel `D[ρ]_jk = F_jk ρ_jk` with precomputed Fourier entries.
///
/// The output is checked to be positive semidefinite.
pub fn approx_dephase_exact(
    rho: &DensityMatrix,
    f: &FourierMatrix,
    spectrum: &Spectrum,
) -> Result<DensityMatrix> {
    check_dims(rho, spectrum)?;
    if f.dim() != spectrum.dim() {
        return Err(Error::DimensionMismatch {
            left: f.dim(),
            right: spectrum.dim(),
        });
    }
    let out = hadamard_channel(rho, spectrum, f.entries())?;
    out.check_positive()?;
    Ok(out)
}

/// Monte-Carlo average of `e^{-iH τ} ρ e^{iH τ}` over `samples` draws.
///
/// `Ideal` short-circuits to the block projection and `None` returns `ρ`.
pub fn approx_dephase_sampled(
    rho: &DensityMatrix,
    dist: &RandomTimeDistribution,
    spectrum: &Spectrum,
    samples: usize,
    seed: u64,
) -> Result<DensityMatrix> {
    check_dims(rho, spectrum)?;
    match dist {
        RandomTimeDistribution::None => return Ok(rho.clone()),
        RandomTimeDistribution::Ideal => return degenerate_dephase(rho, spectrum),
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = sampled_fourier_matrix(dist, spectrum, samples, &mut rng)?;
    hadamard_channel(rho, spectrum, f.entries())
}
