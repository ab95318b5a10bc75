//! Adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands.

// Node and weight tables keep their full published digits.
#![allow(clippy::excessive_precision)]

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Absolute tolerance used throughout the dephasing module.
pub const DEFAULT_ABS_TOL: f64 = 1e-10;

const MAX_INTERVALS: usize = 20_000;

// Kronrod nodes (non-negative half) and weights; Gauss weights for the
// embedded 7-point rule sit on the odd Kronrod indices.
const XK: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693,
    0.279_705_391_489_276_668,
    0.381_830_050_505_118_945,
    0.417_959_183_673_469_388,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: C64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XK[i];
        let s = f(c - dx) + f(c + dx);
        k += s * WK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    Segment {
        a,
        b,
        value: k * h,
        error: ((k - g) * h).norm(),
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate drops below `tol`. The initial interval is pre-split into
/// `initial` pieces, which helps oscillatory integrands.
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: f64, initial: usize) -> Result<C64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration limits [{a}, {b}]")));
    }
    if a == b {
        return Ok(C64::new(0.0, 0.0));
    }
    let pieces = initial.max(1);
    let width = (b - a) / pieces as f64;
    let mut segs: Vec<Segment> = (0..pieces)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == pieces { b } else { lo + width };
            kronrod(&f, lo, hi)
        })
        .collect();

    loop {
        let total_err: f64 = segs.iter().map(|s| s.error).sum();
        if total_err <= tol {
            return Ok(segs.iter().map(|s| s.value).sum());
        }
        if segs.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                error: total_err,
                intervals: segs.len(),
            });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::Quadrature {
                error: total_err,
                intervals: segs.len() + 1,
            });
        }
        segs.push(kronrod(&f, s.a, mid));
        segs.push(kronrod(&f, mid, s.b));
    }
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate(|x| C64::new(f(x), 0.0), a, b, tol, 1).map(|z| z.re)
}
