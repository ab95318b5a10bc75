//! Closed-form decay envelope of the bump-distribution Fourier transform and
//! its inversion.

use std::f64::consts::{E, PI};
use std::sync::OnceLock;

use super::quadrature::integrate_real;
use crate::error::{Error, Result};

/// `∫_{-1}^{1} exp(-1/(1-x²)) dx`, evaluated once by quadrature.
///
/// The rescaled density on `[0, T_d]` is `(2 / (N T_d)) exp(T_d² / (4τ(τ - T_d)))`;
/// its normalization does not depend on `T_d`.
pub fn bump_norm() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| {
        integrate_real(bump_profile, -1.0, 1.0, 1e-14)
            .expect("bump normalization quadrature converges")
    })
}

/// Unnormalized mollifier `exp(-1/(1-x²))` on `(-1, 1)`, zero outside.
pub(crate) fn bump_profile(x: f64) -> f64 {
    let q = 1.0 - x * x;
    if q <= 0.0 {
        0.0
    } else {
        (-1.0 / q).exp()
    }
}

fn envelope(x: f64) -> f64 {
    (8.0 * PI / E.sqrt()).sqrt() * x.powf(-0.75) * (-(x / 2.0).sqrt()).exp()
}

/// Envelope `√(8π/√e) (T_d Δ)^{-3/4} exp(-√(T_d Δ / 2))` on the magnitude of
/// the bump Fourier transform at gap `Δ`.
pub fn bump_delta_bound(t_d: f64, gap: f64) -> Result<f64> {
    let x = t_d * gap;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!(
            "T_d * gap must be positive and finite, got {x}"
        )));
    }
    Ok(envelope(x))
}

/// Principal branch of the Lambert W function, `w e^w = z`, for `z >= -1/e`.
pub fn lambert_w0(z: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if !(z >= branch) || !z.is_finite() {
        return Err(Error::Domain(format!("Lambert W0 needs z >= -1/e, got {z}")));
    }
    if z == branch {
        return Ok(-1.0);
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let mut w = if z < 1.0 {
        // Series around the branch point is accurate near -1/e.
        let p = (2.0 * (E * z + 1.0)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l = z.ln();
        if l > 1.0 {
            l - l.ln()
        } else {
            l
        }
    };
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// Dephasing time whose envelope value at gap `Δ` equals `delta_target`.
///
/// Solves `envelope(T_d Δ) = δ` exactly:
/// `T_d = 9 W0(2√2 π^{1/3} / (3 e^{1/6} δ^{2/3}))² / (2Δ)`.
/// The product `T_d Δ` is computed independently of `Δ`, so `T_d ∝ 1/Δ`.
pub fn required_dephasing_time(delta_target: f64, gap: f64) -> Result<f64> {
    if !(delta_target > 0.0 && delta_target < 1.0) {
        return Err(Error::Domain(format!(
            "target delta must lie in (0, 1), got {delta_target}"
        )));
    }
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::Domain(format!("gap must be positive, got {gap}")));
    }
    let z = 2.0 * 2f64.sqrt() * PI.cbrt() / (3.0 * E.powf(1.0 / 6.0) * delta_target.powf(2.0 / 3.0));
    let w = lambert_w0(z)?;
    let mut x = 4.5 * w * w;
    // Rounding can leave the envelope a hair above the target.
    for _ in 0..64 {
        if envelope(x) <= delta_target {
            break;
        }
        x *= 1.0 + 4.0 * f64::EPSILON;
    }
    Ok(x / gap)
}
